# Módulo de utilitários 