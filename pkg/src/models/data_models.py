"""
Modelos de dados do toolkit de privacidade dχ
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..utils.validators import (
    DUPLICATE_POLICIES,
    MUTATIONS,
    OOV_POLICIES,
    OUTPUT_FORMATS,
    validate_choice,
    validate_epsilon,
    validate_epsilon_grid,
    validate_eta,
    validate_positive_int,
)
from .errors import ConfigurationError


@dataclass
class LoadOptions:
    """Opções de leitura de embeddings em texto"""
    expect_header: bool = False
    lowercase: bool = False
    max_words: Optional[int] = None
    on_duplicate: str = "keep-first"

    def __post_init__(self):
        if self.max_words is not None:
            validate_positive_int(self.max_words, "max_words")
        validate_choice(self.on_duplicate, DUPLICATE_POLICIES, "on_duplicate")


@dataclass(frozen=True)
class NoiseConfig:
    """ε e dimensão n da densidade p_N(z) ∝ exp(-ε‖z‖)"""
    epsilon: float
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "epsilon", validate_epsilon(self.epsilon))
        object.__setattr__(self, "dim", validate_positive_int(self.dim, "dim"))

    @property
    def scale(self) -> float:
        """Escala θ = 1/ε da distribuição Gamma do raio"""
        return 1.0 / self.epsilon


@dataclass
class NoiseSample:
    """Uma amostra de ruído: direção unitária v, magnitude l e vetor l·v"""
    direction: np.ndarray
    magnitude: float
    vector: np.ndarray = field(init=False)

    def __post_init__(self):
        self.vector = self.magnitude * self.direction


@dataclass
class MechanismConfig:
    """Configuração do mecanismo M"""
    epsilon: float
    oov_policy: str = "passthrough"
    record_trace: bool = False
    # Somente para auditoria: "half-noise" ou "shared-noise"
    mutation: Optional[str] = None

    def __post_init__(self):
        self.epsilon = validate_epsilon(self.epsilon)
        validate_choice(self.oov_policy, OOV_POLICIES, "oov_policy")
        if self.mutation is not None:
            validate_choice(self.mutation, MUTATIONS, "mutation")


@dataclass
class PerturbationRecord:
    """Rastro de uma posição processada pelo mecanismo"""
    input_word: str
    output_word: Optional[str]
    noise_norm: float
    changed: bool
    position: int
    in_vocabulary: bool = True
    line: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'input_word': self.input_word,
            'output_word': self.output_word,
            'noise_norm': self.noise_norm,
            'changed': self.changed,
            'position': self.position,
            'in_vocabulary': self.in_vocabulary,
        }
        if self.line is not None:
            data['line'] = self.line
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PerturbationRecord':
        return cls(
            input_word=data.get('input_word', ''),
            output_word=data.get('output_word'),
            noise_norm=float(data.get('noise_norm', 0.0)),
            changed=bool(data.get('changed', False)),
            position=int(data.get('position', 0)),
            in_vocabulary=bool(data.get('in_vocabulary', True)),
            line=data.get('line'),
        )


@dataclass
class DeniabilityStats:
    """Estimativas empíricas de N_w e S_w para uma palavra em um ε"""
    word: str
    epsilon: float
    runs: int
    unchanged_count: int
    distinct_outputs: int
    eta_support: Optional[int] = None
    eta: Optional[float] = None
    top_outputs: List[Tuple[str, int]] = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.unchanged_count <= self.runs:
            raise ConfigurationError("unchanged_count deve estar em [0, runs]")
        if not 1 <= self.distinct_outputs <= self.runs:
            raise ConfigurationError("distinct_outputs deve estar em [1, runs]")
        if self.eta_support is not None and self.eta_support > self.distinct_outputs:
            raise ConfigurationError("eta_support não pode exceder distinct_outputs")

    @property
    def unchanged_frequency(self) -> float:
        """N̂_w = unchanged_count / runs"""
        return self.unchanged_count / self.runs

    def to_dict(self) -> Dict[str, Any]:
        return {
            'word': self.word,
            'epsilon': self.epsilon,
            'runs': self.runs,
            'unchanged_count': self.unchanged_count,
            'distinct_outputs': self.distinct_outputs,
            'eta_support': self.eta_support,
            'eta': self.eta,
            'top_outputs': [[w, c] for w, c in self.top_outputs],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DeniabilityStats':
        return cls(
            word=data.get('word', ''),
            epsilon=float(data['epsilon']),
            runs=int(data['runs']),
            unchanged_count=int(data['unchanged_count']),
            distinct_outputs=int(data['distinct_outputs']),
            eta_support=data.get('eta_support'),
            eta=data.get('eta'),
            top_outputs=[(w, int(c)) for w, c in data.get('top_outputs', [])],
        )


@dataclass
class EntropyProxies:
    """Aproximações H0 ≈ ln S_w e H∞ ≈ ln(1/N_w), em nats"""
    h0: float
    h_inf: float
    clamped: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {'h0': self.h0, 'h_inf': self.h_inf, 'clamped': self.clamped}


@dataclass
class Histogram:
    """Histograma de largura fixa com as bordas dos bins"""
    counts: List[int]
    edges: List[float]
    label: str = ""

    @classmethod
    def from_values(cls, values, bins: int, value_range: Tuple[float, float], label: str = "") -> 'Histogram':
        counts, edges = np.histogram(np.asarray(values, dtype=np.float64), bins=bins, range=value_range)
        return cls(counts=[int(c) for c in counts], edges=[float(e) for e in edges], label=label)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def to_dict(self) -> Dict[str, Any]:
        return {'label': self.label, 'counts': self.counts, 'edges': self.edges}


@dataclass
class SweepResult:
    """Estatísticas por (palavra, ε) de uma varredura de calibração"""
    epsilons: List[float]
    stats: List[DeniabilityStats]
    runs: int
    sample_size: int
    seed: int
    eta: Optional[float] = None
    histograms: Dict[float, Dict[str, Histogram]] = field(default_factory=dict)

    def stats_for(self, epsilon: float) -> List[DeniabilityStats]:
        return [s for s in self.stats if s.epsilon == epsilon]

    @property
    def words(self) -> List[str]:
        seen: Dict[str, None] = {}
        for s in self.stats:
            seen.setdefault(s.word, None)
        return list(seen)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'epsilons': self.epsilons,
            'runs': self.runs,
            'sample_size': self.sample_size,
            'seed': self.seed,
            'eta': self.eta,
            'stats': [s.to_dict() for s in self.stats],
            'histograms': {
                str(eps): {name: h.to_dict() for name, h in hists.items()}
                for eps, hists in self.histograms.items()
            },
        }


@dataclass
class WorstCaseSummary:
    """Garantias de pior caso de S_w e N_w para um ponto da grade"""
    epsilon: float
    sample_size: int
    runs: int
    min_distinct: int
    max_unchanged: int
    mean_distinct: float
    mean_unchanged_frequency: float
    histograms: Dict[str, Histogram] = field(default_factory=dict)

    @property
    def max_unchanged_frequency(self) -> float:
        return self.max_unchanged / self.runs

    def to_dict(self) -> Dict[str, Any]:
        return {
            'epsilon': self.epsilon,
            'sample_size': self.sample_size,
            'runs': self.runs,
            'min_distinct': self.min_distinct,
            'max_unchanged': self.max_unchanged,
            'max_unchanged_frequency': self.max_unchanged_frequency,
            'mean_distinct': self.mean_distinct,
            'mean_unchanged_frequency': self.mean_unchanged_frequency,
            'histograms': {name: h.to_dict() for name, h in self.histograms.items()},
        }


@dataclass
class KnnDistanceTable:
    """Percentis da distância ao k-ésimo vizinho mais próximo"""
    ks: List[int]
    percentiles: List[float]
    cells: List[List[float]]
    sample_size: int

    def cell(self, k: int, percentile: float) -> float:
        return self.cells[self.ks.index(k)][self.percentiles.index(percentile)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ks': self.ks,
            'percentiles': self.percentiles,
            'cells': self.cells,
            'sample_size': self.sample_size,
        }


@dataclass
class AuditConfig:
    """Parâmetros estatísticos da auditoria"""
    samples: int = 1_000_000
    min_count: int = 100
    confidence_sigmas: float = 3.0

    def __post_init__(self):
        validate_positive_int(self.samples, "samples", minimum=10_000)
        validate_positive_int(self.min_count, "min_count", minimum=20)
        if not self.confidence_sigmas > 0:
            raise ConfigurationError("confidence_sigmas deve ser positivo")


@dataclass
class OutputDistribution:
    """Distribuição empírica de M(w)"""
    word: str
    epsilon: float
    samples: int
    counts: Dict[str, int]

    def probability(self, word: str) -> float:
        return self.counts.get(word, 0) / self.samples

    def to_dict(self) -> Dict[str, Any]:
        return {
            'word': self.word,
            'epsilon': self.epsilon,
            'samples': self.samples,
            'counts': dict(sorted(self.counts.items(), key=lambda item: (-item[1], item[0]))),
        }


@dataclass
class OutputAudit:
    """Razão de verossimilhança estimada para uma saída ŵ"""
    output_word: str
    count_w: int
    count_w_prime: int
    log_ratio: float
    standard_error: float
    slack: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'output_word': self.output_word,
            'count_w': self.count_w,
            'count_w_prime': self.count_w_prime,
            'log_ratio': self.log_ratio,
            'standard_error': self.standard_error,
            'slack': self.slack,
        }


@dataclass
class PairAuditResult:
    """Auditoria do limite Pr[M(w)=ŵ]/Pr[M(w')=ŵ] <= exp(ε·d(w,w'))"""
    word: str
    other_word: str
    epsilon: float
    distance: float
    samples: int
    confidence_sigmas: float
    outputs: List[OutputAudit] = field(default_factory=list)

    @property
    def bound(self) -> float:
        return self.epsilon * self.distance

    @property
    def worst_slack(self) -> float:
        """max(log_ratio - ε·d) sobre as saídas admitidas"""
        if not self.outputs:
            return -math.inf
        return max(o.slack for o in self.outputs)

    @property
    def worst_output(self) -> Optional[OutputAudit]:
        if not self.outputs:
            return None
        return max(self.outputs, key=lambda o: o.slack)

    @property
    def worst_excess(self) -> float:
        """max(slack - σ·SE); positivo indica violação além do ruído amostral"""
        if not self.outputs:
            return -math.inf
        return max(o.slack - self.confidence_sigmas * o.standard_error for o in self.outputs)

    @property
    def passed(self) -> bool:
        return self.worst_excess <= 0.0

    def to_dict(self) -> Dict[str, Any]:
        worst = self.worst_output
        return {
            'word': self.word,
            'other_word': self.other_word,
            'epsilon': self.epsilon,
            'distance': self.distance,
            'bound': self.bound,
            'samples': self.samples,
            'confidence_sigmas': self.confidence_sigmas,
            'worst_slack': self.worst_slack if self.outputs else None,
            'worst_slack_band': (self.confidence_sigmas * worst.standard_error) if worst else None,
            'verdict': "pass" if self.passed else "fail",
            'outputs': [o.to_dict() for o in self.outputs],
        }


@dataclass
class CompositionAuditResult:
    """Distância TV entre a distribuição conjunta e o produto das marginais"""
    words: List[str]
    epsilon: float
    samples: int
    tv_distance: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.tv_distance <= self.threshold

    def to_dict(self) -> Dict[str, Any]:
        return {
            'words': self.words,
            'epsilon': self.epsilon,
            'samples': self.samples,
            'tv_distance': self.tv_distance,
            'threshold': self.threshold,
            'verdict': "pass" if self.passed else "fail",
        }


@dataclass
class AuditReport:
    """Relatório completo de auditoria"""
    epsilon: float
    pairs: List[PairAuditResult] = field(default_factory=list)
    compositions: List[CompositionAuditResult] = field(default_factory=list)
    mutation: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.pairs) and all(c.passed for c in self.compositions)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'epsilon': self.epsilon,
            'mutation': self.mutation,
            'verdict': "pass" if self.passed else "fail",
            'pairs': [p.to_dict() for p in self.pairs],
            'compositions': [c.to_dict() for c in self.compositions],
        }


@dataclass
class RunConfig:
    """Configuração de uma execução da linha de comando"""
    command: str
    embedding_path: Optional[str] = None
    epsilons: List[float] = field(default_factory=list)
    seed: int = 0
    runs: int = 1000
    eta: Optional[float] = 0.01
    sample_size: Optional[int] = None
    workers: int = 1
    output_format: str = "csv"
    oov_policy: str = "passthrough"

    COMMANDS = ("privatize", "calibrate", "knn-stats", "audit", "cache")
    NEEDS_EPSILON = ("privatize", "calibrate", "audit")

    def __post_init__(self):
        validate_choice(self.command, self.COMMANDS, "command")
        if not self.embedding_path:
            raise ConfigurationError(f"--embeddings é obrigatório para '{self.command}'")
        if self.command in self.NEEDS_EPSILON:
            self.epsilons = validate_epsilon_grid(self.epsilons)
        validate_positive_int(self.runs, "runs")
        validate_positive_int(self.workers, "workers")
        if self.sample_size is not None:
            validate_positive_int(self.sample_size, "sample_size")
        self.eta = validate_eta(self.eta)
        validate_choice(self.output_format, OUTPUT_FORMATS, "output_format")
        validate_choice(self.oov_policy, OOV_POLICIES, "oov_policy")

    @property
    def epsilon(self) -> float:
        return self.epsilons[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'command': self.command,
            'embedding_path': self.embedding_path,
            'epsilons': self.epsilons,
            'seed': self.seed,
            'runs': self.runs,
            'eta': self.eta,
            'sample_size': self.sample_size,
            'workers': self.workers,
            'output_format': self.output_format,
            'oov_policy': self.oov_policy,
        }
