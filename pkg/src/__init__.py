# Módulo principal do toolkit de privacidade dχ
