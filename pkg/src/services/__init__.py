# Módulo de serviços (embeddings, ruído, mecanismo, calibração, geometria, auditoria)
