"""
Mecanismo M de privacidade dχ: embed -> perturbar -> projetar, por palavra
"""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..models.data_models import MechanismConfig, NoiseConfig, PerturbationRecord
from ..models.embedding_model import EmbeddingModel
from ..models.errors import OutOfVocabularyError
from .embedding_store import nearest_words
from .noise_sampler import RandomStream, iter_noise_batches, sample_noise_batch

logger = logging.getLogger(__name__)

# Linhas do corpus processadas por tarefa
LINES_PER_TASK = 256


class Mechanism:
    """Aplica M(x) palavra a palavra com um sorteio de ruído independente por posição"""

    def __init__(self, model: EmbeddingModel, config: MechanismConfig, workers: int = 1):
        self.model = model
        self.config = config
        self.workers = workers
        self.noise_config = NoiseConfig(epsilon=config.epsilon, dim=model.dim)
        self.oov_count = 0
        self._lock = threading.Lock()

        if config.mutation:
            logger.warning(f"Mecanismo com mutação '{config.mutation}': sem garantia de privacidade")

    @property
    def noise_scale(self) -> float:
        # half-noise: ruído pela metade com o mesmo ε declarado
        return 0.5 if self.config.mutation == "half-noise" else 1.0

    def _noise(self, stream: RandomStream, size: int) -> np.ndarray:
        return sample_noise_batch(stream, self.noise_config, size) * self.noise_scale

    # ------------------------------------------------------------------
    # Palavra única
    # ------------------------------------------------------------------

    def perturb_word(self, stream: RandomStream, word: str) -> Tuple[str, PerturbationRecord]:
        """ŵ = argmin_u ‖φ(u) - (φ(w) + N)‖"""
        index = self.model.index_of(word)
        noise = self._noise(stream, 1)[0]
        query = self.model.vectors[index].astype(np.float64) + noise
        out_idx, _ = nearest_words(self.model, query[None, :])
        output = self.model.words[int(out_idx[0])]

        record = PerturbationRecord(
            input_word=word,
            output_word=output,
            noise_norm=float(np.linalg.norm(noise)),
            changed=output != word,
            position=0,
        )
        return output, record

    def perturb_batch(self, word: str, runs: int, stream: RandomStream) -> np.ndarray:
        """Índices das saídas de runs execuções independentes de M(word)"""
        index = self.model.index_of(word)
        base = self.model.vectors[index].astype(np.float64)

        outputs = []
        for noise in iter_noise_batches(stream, self.noise_config, runs):
            queries = base + noise * self.noise_scale
            idx, _ = nearest_words(self.model, queries, workers=self.workers)
            outputs.append(idx)
        return np.concatenate(outputs) if outputs else np.empty(0, dtype=np.int64)

    def perturb_string_batch(self, words: Sequence[str], runs: int, stream: RandomStream) -> np.ndarray:
        """Matriz runs × ℓ de índices de saída para a string words"""
        indices = self.model.indices_of(words)
        shared_batches = None
        if self.config.mutation == "shared-noise":
            # todas as posições reutilizam os mesmos sorteios da posição 0
            shared_batches = list(iter_noise_batches(stream.child(0), self.noise_config, runs))

        columns = []
        for position, index in enumerate(indices):
            base = self.model.vectors[index].astype(np.float64)
            batches = shared_batches
            if batches is None:
                batches = iter_noise_batches(stream.child(position), self.noise_config, runs)
            outputs = []
            for noise in batches:
                idx, _ = nearest_words(self.model, base + noise * self.noise_scale, workers=self.workers)
                outputs.append(idx)
            columns.append(np.concatenate(outputs))
        if not columns:
            return np.empty((runs, 0), dtype=np.int64)
        return np.stack(columns, axis=1)

    # ------------------------------------------------------------------
    # Strings e corpus
    # ------------------------------------------------------------------

    def perturb_string(
        self, stream: RandomStream, tokens: Sequence[str], line: Optional[int] = None
    ) -> Tuple[List[str], List[PerturbationRecord]]:
        """Aplica M a cada posição; o ruído da posição i vem de stream.child(i)"""
        return self._perturb_many([(stream, list(tokens), line)])[0]

    def perturb_lines(
        self, lines: Sequence[Sequence[str]], seed: int, start_line: int = 0
    ) -> List[Tuple[List[str], List[PerturbationRecord]]]:
        """
        Processa um corpus tokenizado. O fluxo da linha i é RandomStream(seed, i),
        logo o resultado independe do número de workers.
        Os registros e erros numeram as linhas a partir de 1.
        """
        items = [
            (RandomStream(seed, start_line + i), list(tokens), start_line + i + 1)
            for i, tokens in enumerate(lines)
        ]
        blocks = [items[s:s + LINES_PER_TASK] for s in range(0, len(items), LINES_PER_TASK)]

        if self.workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                results = list(executor.map(self._perturb_many, blocks))
        else:
            results = [self._perturb_many(block) for block in blocks]

        return [item for block in results for item in block]

    def _perturb_many(self, items) -> List[Tuple[List[str], List[PerturbationRecord]]]:
        """Sorteia o ruído de todas as posições conhecidas e projeta em um único lote"""
        queries = []
        slots = []  # (item, posição, índice de entrada, norma do ruído)
        oov_here = 0

        for item_no, (stream, tokens, line) in enumerate(items):
            shared = None
            for position, token in enumerate(tokens):
                index = self.model.lookup(token)
                if index is None:
                    if self.config.oov_policy == "error":
                        raise OutOfVocabularyError(token, position, line)
                    oov_here += 1
                    continue

                if self.config.mutation == "shared-noise":
                    if shared is None:
                        shared = self._noise(stream.child(0), 1)[0]
                    noise = shared
                else:
                    noise = self._noise(stream.child(position), 1)[0]

                queries.append(self.model.vectors[index].astype(np.float64) + noise)
                slots.append((item_no, position, index, float(np.linalg.norm(noise))))

        if oov_here:
            with self._lock:
                self.oov_count += oov_here

        projected = {}
        if queries:
            out_idx, _ = nearest_words(self.model, np.vstack(queries))
            for (item_no, position, _, norm), out in zip(slots, out_idx):
                projected[(item_no, position)] = (self.model.words[int(out)], norm)

        results = []
        for item_no, (stream, tokens, line) in enumerate(items):
            output: List[str] = []
            records: List[PerturbationRecord] = []
            for position, token in enumerate(tokens):
                hit = projected.get((item_no, position))
                if hit is not None:
                    word, norm = hit
                    output.append(word)
                    record = PerturbationRecord(token, word, norm, word != token, position, True, line)
                elif self.config.oov_policy == "passthrough":
                    output.append(token)
                    record = PerturbationRecord(token, token, 0.0, False, position, False, line)
                else:
                    # drop: a posição sai da saída mas fica registrada
                    record = PerturbationRecord(token, None, 0.0, True, position, False, line)
                if self.config.record_trace:
                    records.append(record)
            results.append((output, records))
        return results
