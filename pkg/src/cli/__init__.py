# Linha de comando
