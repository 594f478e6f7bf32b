"""
Serviço de calibração: estatísticas de negação plausível N_w e S_w
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..models.data_models import (
    DeniabilityStats,
    EntropyProxies,
    Histogram,
    MechanismConfig,
    SweepResult,
    WorstCaseSummary,
)
from ..models.embedding_model import EmbeddingModel
from ..models.errors import ConfigurationError
from ..utils.validators import validate_epsilon_grid, validate_eta, validate_positive_int
from .mechanism import Mechanism
from .noise_sampler import RandomStream

logger = logging.getLogger(__name__)

DEFAULT_ETA = 0.01
DEFAULT_BINS = 20
TOP_OUTPUTS = 10

# Fluxo reservado para a amostragem de palavras
WORD_SAMPLE_STREAM = 2**32


def eta_support(counts: np.ndarray, eta: float) -> int:
    """Menor conjunto de saídas que acumula ao menos 1 - η da massa empírica"""
    runs = int(counts.sum())
    ordered = np.sort(counts)[::-1]
    cumulative = np.cumsum(ordered)
    target = runs - eta * runs - 1e-9 * runs
    return int(np.searchsorted(cumulative, target, side="left") + 1)


def entropy_proxies(stats: DeniabilityStats) -> EntropyProxies:
    """h0 = ln(S_w) e h_inf = ln(runs / max(unchanged, 1))"""
    clamped = stats.unchanged_count == 0
    if clamped:
        logger.warning(f"N_w estimado em zero para '{stats.word}' (ε={stats.epsilon}); h_inf limitado")
    h0 = math.log(stats.distinct_outputs)
    h_inf = math.log(stats.runs / max(stats.unchanged_count, 1))
    return EntropyProxies(h0=h0, h_inf=h_inf, clamped=clamped)


def renyi_entropy(counts: Sequence[int], alpha: float) -> float:
    """Entropia de Rényi (nats) da distribuição empírica; alpha=1 é Shannon"""
    p = np.asarray(counts, dtype=np.float64)
    p = p[p > 0]
    if p.size == 0:
        raise ConfigurationError("Distribuição vazia")
    p = p / p.sum()

    if alpha < 0:
        raise ConfigurationError("alpha deve ser >= 0")
    if alpha == 0:
        return math.log(p.size)
    if alpha == 1:
        return float(-np.sum(p * np.log(p)))
    if math.isinf(alpha):
        return float(-math.log(p.max()))
    return float(math.log(np.sum(p ** alpha)) / (1.0 - alpha))


def worst_case_summary(sweep: SweepResult) -> List[WorstCaseSummary]:
    """Mínimo de S_w e máximo de N_w por ponto da grade"""
    summaries = []
    for epsilon in sweep.epsilons:
        stats = sweep.stats_for(epsilon)
        if not stats:
            continue
        distinct = [s.distinct_outputs for s in stats]
        unchanged = [s.unchanged_count for s in stats]
        summaries.append(WorstCaseSummary(
            epsilon=epsilon,
            sample_size=len(stats),
            runs=sweep.runs,
            min_distinct=min(distinct),
            max_unchanged=max(unchanged),
            mean_distinct=float(np.mean(distinct)),
            mean_unchanged_frequency=float(np.mean(unchanged)) / sweep.runs,
            histograms=sweep.histograms.get(epsilon, {}),
        ))
    return summaries


def select_epsilon(
    summaries: Sequence[WorstCaseSummary],
    min_support: Optional[int] = None,
    max_unchanged: Optional[int] = None,
) -> Optional[float]:
    """Maior ε da grade cujas garantias de pior caso atendem aos limites"""
    eligible = [
        s.epsilon for s in summaries
        if (min_support is None or s.min_distinct >= min_support)
        and (max_unchanged is None or s.max_unchanged <= max_unchanged)
    ]
    return max(eligible) if eligible else None


class CalibrationService:
    """Estimativa de N_w e S_w por simulação repetida do mecanismo"""

    def __init__(self, model: EmbeddingModel, workers: int = 1):
        self.model = model
        self.workers = workers

    def sample_words(self, size: int, seed: int) -> List[str]:
        """Amostra uniforme sem reposição do vocabulário"""
        validate_positive_int(size, "sample_size")
        if size >= self.model.size:
            return list(self.model.words)
        gen = RandomStream(seed, WORD_SAMPLE_STREAM).generator
        chosen = gen.choice(self.model.size, size=size, replace=False)
        return [self.model.words[int(i)] for i in chosen]

    def estimate_stats(
        self,
        epsilon: float,
        word: str,
        runs: int,
        stream: RandomStream,
        eta: Optional[float] = DEFAULT_ETA,
    ) -> DeniabilityStats:
        """Executa M(word) runs vezes e conta saídas inalteradas e distintas"""
        validate_positive_int(runs, "runs")
        eta = validate_eta(eta)
        index = self.model.index_of(word)

        mechanism = Mechanism(self.model, MechanismConfig(epsilon=epsilon))
        outputs = mechanism.perturb_batch(word, runs, stream)
        values, counts = np.unique(outputs, return_counts=True)

        unchanged = int(counts[values == index].sum())
        top = sorted(zip(counts.tolist(), values.tolist()), key=lambda item: (-item[0], item[1]))[:TOP_OUTPUTS]

        return DeniabilityStats(
            word=word,
            epsilon=float(epsilon),
            runs=runs,
            unchanged_count=unchanged,
            distinct_outputs=int(values.size),
            eta_support=eta_support(counts, eta) if eta is not None else None,
            eta=eta,
            top_outputs=[(self.model.words[i], c) for c, i in top],
        )

    def sweep(
        self,
        epsilons: Sequence[float],
        words: Sequence[str],
        runs: int,
        seed: int,
        eta: Optional[float] = DEFAULT_ETA,
        bins: int = DEFAULT_BINS,
    ) -> SweepResult:
        """Estatísticas para cada (palavra, ε); fluxos por (índice da palavra, índice de ε)"""
        epsilons = validate_epsilon_grid(epsilons)
        if not words:
            raise ConfigurationError("A amostra de palavras não pode ser vazia")

        known = []
        for word in words:
            if word in self.model:
                known.append(word)
            else:
                logger.warning(f"Palavra '{word}' fora do vocabulário; ignorada na varredura")

        tasks = [(word, ei, eps) for ei, eps in enumerate(epsilons) for word in known]

        def run(task) -> DeniabilityStats:
            word, ei, eps = task
            stream = RandomStream(seed, (self.model.index_of(word), ei))
            return self.estimate_stats(eps, word, runs, stream, eta)

        try:
            if self.workers > 1 and len(tasks) > 1:
                with ThreadPoolExecutor(max_workers=self.workers) as executor:
                    stats = list(executor.map(run, tasks))
            else:
                stats = [run(task) for task in tasks]
        except Exception as e:
            logger.error(f"Erro na varredura de calibração: {e}")
            raise

        result = SweepResult(
            epsilons=epsilons,
            stats=stats,
            runs=runs,
            sample_size=len(known),
            seed=seed,
            eta=eta,
        )
        result.histograms = self._histograms(result, bins)
        logger.info(f"Varredura concluída: {len(known)} palavras x {len(epsilons)} valores de ε, R={runs}")
        return result

    @staticmethod
    def _histograms(sweep: SweepResult, bins: int) -> Dict[float, Dict[str, Histogram]]:
        histograms: Dict[float, Dict[str, Histogram]] = {}
        for epsilon in sweep.epsilons:
            stats = sweep.stats_for(epsilon)
            if not stats:
                continue
            histograms[epsilon] = {
                'unchanged_count': Histogram.from_values(
                    [s.unchanged_count for s in stats], bins, (0, sweep.runs), label="N_w (contagem)"
                ),
                'distinct_outputs': Histogram.from_values(
                    [s.distinct_outputs for s in stats], bins, (1, sweep.runs), label="S_w (distintas)"
                ),
            }
        return histograms

