"""
Amostragem do ruído N com densidade p_N(z) ∝ exp(-ε‖z‖)

A direção vem de uma normal padrão n-dimensional normalizada para a esfera
unitária e a magnitude de uma Gamma(forma=n, escala=1/ε). O gerador é Philox
(baseado em contador) com fluxos derivados de (seed, stream_id) via SeedSequence.
"""
from dataclasses import dataclass, field
from typing import Dict, Tuple, Union

import numpy as np

from ..models.data_models import NoiseConfig, NoiseSample
from ..models.errors import ConfigurationError

StreamKey = Union[int, Tuple[int, ...]]

_SEED_MASK = (1 << 64) - 1

# Sub-fluxos fixos de um RandomStream usados por sample_noise
DIRECTION_STREAM = 0
MAGNITUDE_STREAM = 1

# Linhas geradas por vez nas amostragens em lote
BATCH_CHUNK = 65536


@dataclass
class RandomStream:
    """Fluxo determinístico: (seed, stream_id) iguais produzem a mesma sequência"""
    seed: int
    stream_id: StreamKey = 0
    _generator: np.random.Generator = field(default=None, init=False, repr=False, compare=False)
    _children: Dict[Tuple[int, ...], "RandomStream"] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        key = (self.stream_id,) if isinstance(self.stream_id, (int, np.integer)) else tuple(self.stream_id)
        if any(int(k) < 0 for k in key):
            raise ConfigurationError(f"stream_id deve ser não negativo: {self.stream_id}")
        self.stream_id = tuple(int(k) for k in key)
        self.seed = int(self.seed) & _SEED_MASK

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream_id)
            self._generator = np.random.Generator(np.random.Philox(sequence))
        return self._generator

    def child(self, *ids: int) -> "RandomStream":
        """Sub-fluxo (seed, stream_id + ids); a mesma instância é devolvida em chamadas repetidas"""
        key = tuple(int(i) for i in ids)
        if key not in self._children:
            self._children[key] = RandomStream(self.seed, self.stream_id + key)
        return self._children[key]


def sample_direction(stream: RandomStream, n: int) -> np.ndarray:
    """Vetor unitário isotrópico em R^n"""
    return sample_directions(stream, n, 1)[0]


def sample_directions(stream: RandomStream, n: int, size: int) -> np.ndarray:
    """size direções unitárias, geradas em sequência no fluxo"""
    if n < 1:
        raise ConfigurationError(f"Dimensão deve ser >= 1, recebida {n}")

    gen = stream.generator
    v = gen.standard_normal((size, n))
    norms = np.linalg.norm(v, axis=1)

    # Sorteio degenerado (norma zero) é refeito; probabilidade zero na teoria
    degenerate = np.nonzero(norms == 0.0)[0]
    for i in degenerate:
        while norms[i] == 0.0:
            v[i] = gen.standard_normal(n)
            norms[i] = np.linalg.norm(v[i])

    return v / norms[:, None]


def sample_magnitude(stream: RandomStream, cfg: NoiseConfig) -> float:
    """Magnitude l ~ Gamma(forma=n, escala=1/ε)"""
    return float(sample_magnitudes(stream, cfg, 1)[0])


def sample_magnitudes(stream: RandomStream, cfg: NoiseConfig, size: int) -> np.ndarray:
    # numpy usa Marsaglia-Tsang (rejeição) para forma >= 1
    return stream.generator.gamma(shape=cfg.dim, scale=cfg.scale, size=size)


def sample_noise(stream: RandomStream, cfg: NoiseConfig) -> NoiseSample:
    """Uma amostra N = l·v"""
    direction = sample_direction(stream.child(DIRECTION_STREAM), cfg.dim)
    magnitude = sample_magnitude(stream.child(MAGNITUDE_STREAM), cfg)
    return NoiseSample(direction=direction, magnitude=magnitude)


def sample_noise_batch(stream: RandomStream, cfg: NoiseConfig, size: int) -> np.ndarray:
    """
    size vetores de ruído (size × n).

    Direções e magnitudes vêm dos mesmos sub-fluxos de sample_noise, em ordem,
    então a primeira linha coincide com sample_noise(stream, cfg) e um lote de R
    é prefixo de um lote de R' > R.
    """
    directions = sample_directions(stream.child(DIRECTION_STREAM), cfg.dim, size)
    magnitudes = sample_magnitudes(stream.child(MAGNITUDE_STREAM), cfg, size)
    return directions * magnitudes[:, None]


def iter_noise_batches(stream: RandomStream, cfg: NoiseConfig, total: int, chunk: int = BATCH_CHUNK):
    """Gera o ruído de um lote grande em blocos, preservando a sequência"""
    remaining = total
    while remaining > 0:
        size = min(chunk, remaining)
        yield sample_noise_batch(stream, cfg, size)
        remaining -= size
