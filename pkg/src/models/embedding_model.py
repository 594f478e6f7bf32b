"""
Modelo de embedding imutável (vocabulário + matriz de vetores)
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError, EmbeddingDataError, WordNotFoundError


@dataclass(frozen=True)
class EmbeddingModel:
    """Vocabulário W e mapa φ: W -> R^n que definem o espaço métrico"""
    words: Sequence[str]
    vectors: np.ndarray
    name: str = ""
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        words = tuple(self.words)
        vectors = np.asarray(self.vectors)

        if vectors.ndim != 2:
            raise DimensionMismatchError(expected=2, found=vectors.ndim)
        if vectors.shape[0] != len(words):
            raise EmbeddingDataError(
                f"Quantidade de vetores ({vectors.shape[0]}) difere do vocabulário ({len(words)})"
            )
        if vectors.shape[1] < 1:
            raise ConfigurationError("A dimensão do embedding deve ser positiva")

        if vectors.dtype != np.float32:
            vectors = vectors.astype(np.float32)
        if not np.all(np.isfinite(vectors)):
            raise EmbeddingDataError("O embedding contém valores não finitos (NaN/Inf)")

        index: Dict[str, int] = {}
        for i, word in enumerate(words):
            if word in index:
                raise EmbeddingDataError(f"Token duplicado no vocabulário: '{word}'")
            index[word] = i

        # Imutável: arrays de memmap já chegam somente-leitura
        if vectors.flags.writeable:
            vectors = vectors.copy()
            vectors.setflags(write=False)

        object.__setattr__(self, "words", words)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "_index", index)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def size(self) -> int:
        return len(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self._index

    def lookup(self, word: str) -> Optional[int]:
        """Índice da palavra ou None se ausente"""
        return self._index.get(word)

    def index_of(self, word: str) -> int:
        """Índice da palavra; WordNotFoundError se ausente"""
        index = self._index.get(word)
        if index is None:
            raise WordNotFoundError(word)
        return index

    def indices_of(self, words: Sequence[str]) -> List[int]:
        return [self.index_of(word) for word in words]
