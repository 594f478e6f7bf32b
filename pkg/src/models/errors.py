"""
Exceções do toolkit de privacidade
"""
from typing import Optional


class PrivacyToolError(Exception):
    """Erro base do toolkit"""


class ConfigurationError(PrivacyToolError, ValueError):
    """Parâmetro ou flag inválido"""


class EmbeddingDataError(PrivacyToolError):
    """Erro nos dados de embedding ou de entrada"""


class EmbeddingParseError(EmbeddingDataError):
    """Linha malformada no arquivo de embeddings"""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"Linha {line_number}: {message}")


class DimensionMismatchError(EmbeddingDataError):
    """Dimensão diferente da esperada"""

    def __init__(self, expected: int, found: int, line_number: Optional[int] = None):
        self.expected = expected
        self.found = found
        self.line_number = line_number
        where = f"Linha {line_number}: " if line_number is not None else ""
        super().__init__(f"{where}dimensão esperada {expected}, encontrada {found}")


class DuplicateTokenError(EmbeddingDataError):
    """Token repetido com on_duplicate=error"""

    def __init__(self, token: str, line_number: int):
        self.token = token
        self.line_number = line_number
        super().__init__(f"Linha {line_number}: token duplicado '{token}'")


class CacheError(EmbeddingDataError):
    """Erro ao ler o cache binário"""


class IncompatibleCacheError(CacheError):
    """Magic ou versão do cache não reconhecidos"""


class CorruptCacheError(CacheError):
    """Cache truncado ou inconsistente"""


class WordNotFoundError(EmbeddingDataError, LookupError):
    """Palavra fora do vocabulário"""

    def __init__(self, word: str):
        self.word = word
        super().__init__(f"Palavra '{word}' não encontrada no vocabulário")


class OutOfVocabularyError(EmbeddingDataError):
    """Token OOV encontrado com oov_policy=error"""

    def __init__(self, token: str, position: int, line: Optional[int] = None):
        self.token = token
        self.position = position
        self.line = line
        where = f"linha {line}, " if line is not None else ""
        super().__init__(f"Token fora do vocabulário '{token}' ({where}posição {position})")


class SequenceLengthError(PrivacyToolError, ValueError):
    """Sequências de tamanhos diferentes"""
