"""
Serviço de verificação empírica da garantia de privacidade dχ

Estima por simulação as distribuições de saída de M em vocabulários pequenos e
confere, com folga estatística, o limite de razão exp(ε·d(w,w')) e a
decomposição por posição Pr[M(x)=x̂] = Π Pr[M(w_i)=ŵ_i].
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, stats

from ..models.data_models import (
    AuditConfig,
    AuditReport,
    CompositionAuditResult,
    MechanismConfig,
    OutputAudit,
    OutputDistribution,
    PairAuditResult,
)
from ..models.embedding_model import EmbeddingModel
from ..models.errors import ConfigurationError, SequenceLengthError
from .embedding_store import string_distance
from .mechanism import Mechanism
from .noise_sampler import RandomStream

logger = logging.getLogger(__name__)

DEFAULT_TV_THRESHOLD = 0.01

# Fluxo reservado para a auditoria de composição
COMPOSITION_STREAM = 2**32 + 1


def halfspace_stay_probability(distance: float, epsilon: float, dim: int) -> float:
    """
    P(M(w) = w) em um vocabulário de duas palavras a distância d.

    A célula de Voronoi de w é o semi-espaço até o bissetor, a d/2 de φ(w).
    Integra a densidade Gamma(n, 1/ε) do raio contra P(v_1 > t/r) da direção.
    """
    if distance <= 0:
        raise ConfigurationError("A distância deve ser positiva")
    t = distance / 2.0
    radial = stats.gamma(a=dim, scale=1.0 / epsilon)

    def crossing(r: float) -> float:
        c = t / r
        if dim == 1:
            return 0.5
        # v_1² ~ Beta(1/2, (n-1)/2) para v uniforme na esfera
        return 0.5 * stats.beta.sf(c * c, 0.5, (dim - 1) / 2.0)

    # Cauda além de hi tem massa desprezível
    hi = float(radial.isf(1e-15))
    if hi <= t:
        return 1.0
    mean = dim / epsilon
    points = [mean] if t < mean < hi else None
    escape, _ = integrate.quad(lambda r: radial.pdf(r) * crossing(r), t, hi, points=points, limit=200)
    return 1.0 - escape


class PrivacyVerifier:
    """Auditoria empírica do mecanismo em vocabulários pequenos"""

    def __init__(self, model: EmbeddingModel, mutation: Optional[str] = None):
        self.model = model
        self.mutation = mutation
        if model.size > 100:
            logger.warning(f"Vocabulário com {model.size} palavras; a auditoria foi pensada para |W| <= 100")

    def _mechanism(self, epsilon: float) -> Mechanism:
        return Mechanism(self.model, MechanismConfig(epsilon=epsilon, mutation=self.mutation))

    def exhaustive_distribution(
        self, epsilon: float, word: str, samples: int, stream: RandomStream
    ) -> OutputDistribution:
        """Frequências de M(word) em samples execuções"""
        outputs = self._mechanism(epsilon).perturb_batch(word, samples, stream)
        values, counts = np.unique(outputs, return_counts=True)
        return OutputDistribution(
            word=word,
            epsilon=float(epsilon),
            samples=samples,
            counts={self.model.words[int(v)]: int(c) for v, c in zip(values, counts)},
        )

    def compare(
        self,
        dist_w: OutputDistribution,
        dist_other: OutputDistribution,
        cfg: AuditConfig,
    ) -> PairAuditResult:
        """Razões de verossimilhança por saída admitida (contagem >= min_count nas duas)"""
        epsilon = dist_w.epsilon
        distance = string_distance(self.model, [dist_w.word], [dist_other.word])
        result = PairAuditResult(
            word=dist_w.word,
            other_word=dist_other.word,
            epsilon=epsilon,
            distance=distance,
            samples=dist_w.samples,
            confidence_sigmas=cfg.confidence_sigmas,
        )

        for output in sorted(set(dist_w.counts) & set(dist_other.counts)):
            count_w = dist_w.counts[output]
            count_other = dist_other.counts[output]
            if count_w < cfg.min_count or count_other < cfg.min_count:
                continue
            log_ratio = math.log((count_w / dist_w.samples) / (count_other / dist_other.samples))
            # Método delta para o log da razão de duas proporções
            standard_error = math.sqrt(1.0 / count_w + 1.0 / count_other)
            result.outputs.append(OutputAudit(
                output_word=output,
                count_w=count_w,
                count_w_prime=count_other,
                log_ratio=log_ratio,
                standard_error=standard_error,
                slack=log_ratio - epsilon * distance,
            ))

        if not result.passed:
            worst = result.worst_output
            logger.warning(
                f"Violação em ({result.word}, {result.other_word}) ε={epsilon}: "
                f"saída '{worst.output_word}' com folga {worst.slack:.4f} > {cfg.confidence_sigmas}·SE"
            )
        return result

    def audit_pair(
        self,
        epsilon: float,
        word: str,
        other_word: str,
        cfg: AuditConfig,
        stream: RandomStream,
    ) -> PairAuditResult:
        """Audita o par ordenado (w, w')"""
        dist_w = self.exhaustive_distribution(epsilon, word, cfg.samples, stream.child(0))
        dist_other = self.exhaustive_distribution(epsilon, other_word, cfg.samples, stream.child(1))
        return self.compare(dist_w, dist_other, cfg)

    def audit_all_pairs(
        self,
        epsilon: float,
        words: Optional[Sequence[str]],
        cfg: AuditConfig,
        seed: int,
    ) -> AuditReport:
        """Estima a distribuição de cada palavra uma vez e audita todos os pares ordenados"""
        words = list(self.model.words) if words is None else list(words)
        distributions: Dict[str, OutputDistribution] = {}
        for word in words:
            stream = RandomStream(seed, self.model.index_of(word))
            distributions[word] = self.exhaustive_distribution(epsilon, word, cfg.samples, stream)

        report = AuditReport(epsilon=float(epsilon), mutation=self.mutation)
        for word in words:
            for other in words:
                if other != word:
                    report.pairs.append(self.compare(distributions[word], distributions[other], cfg))

        failed = sum(1 for p in report.pairs if not p.passed)
        logger.info(f"Auditoria ε={epsilon}: {len(report.pairs)} pares, {failed} com violação")
        return report

    def audit_composition(
        self,
        epsilon: float,
        words: Sequence[str],
        cfg: AuditConfig,
        stream: RandomStream,
        threshold: float = DEFAULT_TV_THRESHOLD,
    ) -> CompositionAuditResult:
        """Distância TV entre a conjunta de M(x) e o produto das marginais de execuções separadas"""
        words = list(words)
        if len(words) != 2:
            raise SequenceLengthError("A auditoria de composição usa entradas de duas palavras")

        mechanism = self._mechanism(epsilon)
        size = self.model.size

        joint = mechanism.perturb_string_batch(words, cfg.samples, stream.child(0))
        joint_codes = joint[:, 0] * size + joint[:, 1]
        codes, joint_counts = np.unique(joint_codes, return_counts=True)
        joint_p = dict(zip(codes.tolist(), (joint_counts / cfg.samples).tolist()))

        marginals: List[np.ndarray] = []
        for position, word in enumerate(words):
            outputs = mechanism.perturb_batch(word, cfg.samples, stream.child(1, position))
            marginals.append(np.bincount(outputs, minlength=size) / cfg.samples)

        product = np.outer(marginals[0], marginals[1]).ravel()
        support = set(joint_p) | set(np.nonzero(product)[0].tolist())
        tv = 0.5 * math.fsum(abs(joint_p.get(c, 0.0) - float(product[c])) for c in support)

        result = CompositionAuditResult(
            words=words,
            epsilon=float(epsilon),
            samples=cfg.samples,
            tv_distance=tv,
            threshold=threshold,
        )
        logger.info(f"Composição {words} ε={epsilon}: TV={tv:.5f} (limite {threshold})")
        return result
