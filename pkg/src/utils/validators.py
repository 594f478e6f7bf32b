"""
Utilitários de validação de parâmetros
"""
import math
from typing import Iterable, List, Optional, Sequence

from ..models.errors import ConfigurationError

OOV_POLICIES = ("passthrough", "drop", "error")
DUPLICATE_POLICIES = ("keep-first", "error")
MUTATIONS = ("half-noise", "shared-noise")
OUTPUT_FORMATS = ("csv", "json", "text")


def validate_epsilon(epsilon: float) -> float:
    """Valida o parâmetro de privacidade ε"""
    try:
        value = float(epsilon)
    except (ValueError, TypeError):
        raise ConfigurationError(f"Epsilon inválido: {epsilon!r}")

    if not math.isfinite(value) or value <= 0:
        raise ConfigurationError(f"Epsilon deve ser positivo e finito, recebido {epsilon!r}")
    return value


def validate_epsilon_grid(epsilons: Iterable[float]) -> List[float]:
    grid = [validate_epsilon(e) for e in epsilons]
    if not grid:
        raise ConfigurationError("A grade de epsilons não pode ser vazia")
    return grid


def validate_positive_int(value: int, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ConfigurationError(f"{name} deve ser inteiro, recebido {value!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} deve ser >= {minimum}, recebido {value}")
    return int(value)


def validate_eta(eta: Optional[float]) -> Optional[float]:
    if eta is None:
        return None
    if not 0.0 <= float(eta) < 1.0:
        raise ConfigurationError(f"Eta deve estar em [0, 1), recebido {eta}")
    return float(eta)


def validate_choice(value: str, choices: Sequence[str], name: str) -> str:
    if value not in choices:
        raise ConfigurationError(f"{name} inválido: '{value}'. Opções: {', '.join(choices)}")
    return value


def validate_ks(ks: Sequence[int], vocabulary_size: int) -> List[int]:
    """Valida lista de k: crescente e com max(k) <= |W| - 1"""
    ks = [validate_positive_int(k, "k") for k in ks]
    if not ks:
        raise ConfigurationError("A lista de k não pode ser vazia")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigurationError(f"Os valores de k devem ser estritamente crescentes: {ks}")
    if ks[-1] > vocabulary_size - 1:
        raise ConfigurationError(
            f"k={ks[-1]} fora do intervalo para vocabulário de {vocabulary_size} palavras"
        )
    return ks


def validate_percentiles(percentiles: Sequence[float]) -> List[float]:
    values = [float(p) for p in percentiles]
    if not values:
        raise ConfigurationError("A lista de percentis não pode ser vazia")
    for p in values:
        if not 0.0 < p < 100.0:
            raise ConfigurationError(f"Percentil deve estar em (0, 100), recebido {p}")
    return values
