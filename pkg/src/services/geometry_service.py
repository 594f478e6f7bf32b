"""
Serviço de geometria: distâncias ao k-ésimo vizinho no espaço de embedding
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from ..models.data_models import Histogram, KnnDistanceTable
from ..models.embedding_model import EmbeddingModel
from ..models.errors import ConfigurationError
from ..utils.validators import validate_ks, validate_percentiles, validate_positive_int
from .embedding_store import k_nearest_indices

logger = logging.getLogger(__name__)

DEFAULT_KS = [1, 5, 10, 20, 50, 100, 200, 500, 1000]
DEFAULT_PERCENTILES = [5.0, 20.0, 50.0, 80.0, 95.0]


class GeometryService:
    """Análise das distâncias entre cada palavra e seus k vizinhos"""

    def __init__(self, model: EmbeddingModel, workers: int = 1):
        self.model = model
        self.workers = workers

    def knn_distance_matrix(self, k_max: int, words: Optional[Sequence[str]] = None) -> np.ndarray:
        """Linha i: distâncias ordenadas da palavra i aos seus k_max vizinhos (sem ela mesma)"""
        words = list(self.model.words) if words is None else list(words)
        indices = self.model.indices_of(words)

        def row(index: int) -> np.ndarray:
            return k_nearest_indices(self.model, index, k_max)[1]

        if self.workers > 1 and len(indices) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                rows = list(executor.map(row, indices))
        else:
            rows = [row(i) for i in indices]

        if not rows:
            return np.empty((0, k_max), dtype=np.float64)
        return np.vstack(rows)

    def knn_distance_table(
        self,
        ks: Sequence[int] = DEFAULT_KS,
        percentiles: Sequence[float] = DEFAULT_PERCENTILES,
        words: Optional[Sequence[str]] = None,
    ) -> KnnDistanceTable:
        """Percentis (interpolação linear) da distância ao k-ésimo vizinho"""
        ks = validate_ks(ks, self.model.size)
        percentiles = validate_percentiles(percentiles)

        distances = self.knn_distance_matrix(ks[-1], words)
        if len(distances) == 0:
            raise ConfigurationError("A amostra de palavras não pode ser vazia")

        cells: List[List[float]] = []
        for k in ks:
            values = np.percentile(distances[:, k - 1], percentiles, method="linear")
            cells.append([float(v) for v in values])

        logger.info(f"Tabela k-NN calculada para {len(distances)} palavras, ks={ks}")
        return KnnDistanceTable(ks=ks, percentiles=percentiles, cells=cells, sample_size=len(distances))

    def knn_distance_histogram(
        self,
        k: int,
        bins: int = 30,
        words: Optional[Sequence[str]] = None,
    ) -> Histogram:
        """Histograma da distância ao k-ésimo vizinho, com as bordas dos bins"""
        validate_ks([k], self.model.size)
        validate_positive_int(bins, "bins")

        values = self.knn_distance_matrix(k, words)[:, k - 1]
        if values.size == 0:
            raise ConfigurationError("A amostra de palavras não pode ser vazia")

        low, high = float(values.min()), float(values.max())
        if high == low:
            high = low + 1.0
        return Histogram.from_values(values, bins, (low, high), label=f"distância ao {k}-ésimo vizinho")
