"""
Serviço de embeddings: leitura, cache binário e busca exata de vizinhos
"""
import logging
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..models.data_models import LoadOptions
from ..models.embedding_model import EmbeddingModel
from ..models.errors import (
    ConfigurationError,
    CorruptCacheError,
    DimensionMismatchError,
    DuplicateTokenError,
    EmbeddingDataError,
    EmbeddingParseError,
    IncompatibleCacheError,
    SequenceLengthError,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CACHE_MAGIC = b"DXEMBED\x00"
CACHE_VERSION = 1
# magic, versão, n, |W|, bytes do nome, bytes do bloco de tokens
_CACHE_HEADER = struct.Struct("<8sIIQIQ")
_TOKEN_LENGTH = struct.Struct("<I")

# Blocos do vocabulário processados por vez nas buscas
VOCAB_CHUNK = 4096
QUERY_CHUNK = 256


# ---------------------------------------------------------------------------
# Leitura de arquivos texto (GloVe / fastText)
# ---------------------------------------------------------------------------

def load_text_embeddings(path: PathLike, opts: Optional[LoadOptions] = None) -> EmbeddingModel:
    """
    Carrega embeddings no formato texto: token seguido de n números por linha.

    Sem expect_header, uma primeira linha com dois inteiros "quantidade dimensão" é
    tratada como cabeçalho fastText quando a linha seguinte tem exatamente essa dimensão.
    """
    opts = opts or LoadOptions()
    path = Path(path)

    words: List[str] = []
    rows: List[np.ndarray] = []
    seen: Dict[str, int] = {}
    dim: Optional[int] = None
    skipped_duplicates = 0
    pending: Optional[Tuple[List[str], int]] = None  # (campos da linha 1, dimensão do cabeçalho)

    def add_row(fields: List[str], line_number: int) -> None:
        nonlocal dim, skipped_duplicates
        if len(fields) < 2:
            raise EmbeddingParseError(line_number, "linha sem valores numéricos")

        found = len(fields) - 1
        if dim is None:
            dim = found
        elif found != dim:
            raise DimensionMismatchError(expected=dim, found=found, line_number=line_number)

        try:
            vector = np.array(fields[1:], dtype=np.float32)
        except ValueError:
            raise EmbeddingParseError(line_number, "valor numérico inválido")
        if not np.all(np.isfinite(vector)):
            raise EmbeddingParseError(line_number, "valor não finito (NaN/Inf)")

        token = fields[0].lower() if opts.lowercase else fields[0]
        if token in seen:
            if opts.on_duplicate == "error":
                raise DuplicateTokenError(token, line_number)
            skipped_duplicates += 1
            return

        seen[token] = len(words)
        words.append(token)
        rows.append(vector)

    def reached_limit() -> bool:
        return opts.max_words is not None and len(words) >= opts.max_words

    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            fields = line.split()
            if not fields:
                continue

            if line_number == 1:
                if opts.expect_header:
                    dim = _parse_header(fields, line_number)
                    continue
                header_dim = _header_dimension(fields)
                if header_dim is not None:
                    pending = (fields, header_dim)
                    continue

            if pending is not None:
                first_fields, header_dim = pending
                pending = None
                if len(fields) - 1 == header_dim:
                    logger.info(f"Cabeçalho fastText detectado em {path}: n={header_dim}")
                    dim = header_dim
                else:
                    add_row(first_fields, 1)
                    if reached_limit():
                        break

            add_row(fields, line_number)
            if reached_limit():
                break

    if pending is not None:
        add_row(pending[0], 1)

    if not words:
        raise EmbeddingDataError(f"Nenhum vetor encontrado em {path}")
    if skipped_duplicates:
        logger.warning(f"{skipped_duplicates} tokens duplicados ignorados em {path} (keep-first)")

    vectors = np.vstack(rows)
    vectors.setflags(write=False)
    model = EmbeddingModel(words=words, vectors=vectors, name=str(path))
    logger.info(f"Embedding carregado de {path}: |W|={model.size}, n={model.dim}")
    return model


def _header_dimension(fields: List[str]) -> Optional[int]:
    """Dimensão declarada se a linha tem a forma de um cabeçalho fastText"""
    if len(fields) != 2 or not (fields[0].isdigit() and fields[1].isdigit()):
        return None
    dim = int(fields[1])
    return dim if dim >= 1 else None


def _parse_header(fields: List[str], line_number: int) -> int:
    if len(fields) != 2:
        raise EmbeddingParseError(line_number, "cabeçalho fastText deve ter 'quantidade dimensão'")
    try:
        count, dim = int(fields[0]), int(fields[1])
    except ValueError:
        raise EmbeddingParseError(line_number, "cabeçalho com valores não inteiros")
    if count < 0 or dim < 1:
        raise EmbeddingParseError(line_number, "cabeçalho com valores fora do intervalo")
    return dim


# ---------------------------------------------------------------------------
# Cache binário
# ---------------------------------------------------------------------------

def save_cache(model: EmbeddingModel, path: PathLike) -> None:
    """Grava o modelo no formato binário little-endian versionado"""
    from ..utils.output_writer import atomic_binary_writer

    name_bytes = model.name.encode("utf-8")
    token_block = bytearray()
    for word in model.words:
        encoded = word.encode("utf-8")
        token_block += _TOKEN_LENGTH.pack(len(encoded))
        token_block += encoded

    header = _CACHE_HEADER.pack(
        CACHE_MAGIC, CACHE_VERSION, model.dim, model.size, len(name_bytes), len(token_block)
    )
    with atomic_binary_writer(path) as f:
        f.write(header)
        f.write(name_bytes)
        f.write(bytes(token_block))
        f.write(np.ascontiguousarray(model.vectors, dtype="<f4").tobytes())

    logger.info(f"Cache gravado em {path} ({model.size} palavras, n={model.dim})")


def is_cache_file(path: PathLike) -> bool:
    """Verifica pelo magic se o arquivo é um cache binário"""
    try:
        with open(path, "rb") as f:
            return f.read(len(CACHE_MAGIC)) == CACHE_MAGIC
    except OSError:
        return False


def load_cache(path: PathLike, mmap: bool = False) -> EmbeddingModel:
    """Lê um cache gravado por save_cache"""
    path = Path(path)
    file_size = path.stat().st_size

    with open(path, "rb") as f:
        header = f.read(_CACHE_HEADER.size)
        if len(header) < len(CACHE_MAGIC) or header[:len(CACHE_MAGIC)] != CACHE_MAGIC:
            raise IncompatibleCacheError(f"{path}: magic inválido, não é um cache de embeddings")
        if len(header) < _CACHE_HEADER.size:
            raise CorruptCacheError(f"{path}: cabeçalho truncado")

        magic, version, dim, count, name_length, token_bytes = _CACHE_HEADER.unpack(header)
        if version != CACHE_VERSION:
            raise IncompatibleCacheError(f"{path}: versão {version} não suportada (esperada {CACHE_VERSION})")

        vector_offset = _CACHE_HEADER.size + name_length + token_bytes
        expected_size = vector_offset + count * dim * 4
        if file_size != expected_size:
            raise CorruptCacheError(f"{path}: tamanho {file_size} difere do esperado {expected_size}")

        name = f.read(name_length).decode("utf-8")
        words = _decode_tokens(f.read(token_bytes), count, path)

        if mmap:
            vectors = np.memmap(path, dtype="<f4", mode="r", offset=vector_offset, shape=(count, dim))
        else:
            vectors = np.frombuffer(f.read(count * dim * 4), dtype="<f4").reshape(count, dim)

    model = EmbeddingModel(words=words, vectors=vectors, name=name)
    logger.info(f"Cache carregado de {path}: |W|={model.size}, n={model.dim}")
    return model


def _decode_tokens(block: bytes, count: int, path: Path) -> List[str]:
    words: List[str] = []
    offset = 0
    try:
        for _ in range(count):
            (length,) = _TOKEN_LENGTH.unpack_from(block, offset)
            offset += _TOKEN_LENGTH.size
            if offset + length > len(block):
                raise CorruptCacheError(f"{path}: bloco de tokens truncado")
            words.append(block[offset:offset + length].decode("utf-8"))
            offset += length
    except (struct.error, UnicodeDecodeError) as e:
        raise CorruptCacheError(f"{path}: bloco de tokens inválido ({e})")
    if offset != len(block):
        raise CorruptCacheError(f"{path}: bytes sobrando no bloco de tokens")
    return words


# ---------------------------------------------------------------------------
# Consultas no espaço métrico
# ---------------------------------------------------------------------------

def vector_of(model: EmbeddingModel, word: str) -> Optional[np.ndarray]:
    """φ(w) para palavras conhecidas; None para OOV"""
    index = model.lookup(word)
    if index is None:
        return None
    return model.vectors[index]


def nearest_word(model: EmbeddingModel, query: np.ndarray) -> Tuple[int, float]:
    """argmin_u ‖φ(u) - query‖ com desempate pelo menor índice"""
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1:
        raise DimensionMismatchError(expected=1, found=query.ndim)
    indices, distances = nearest_words(model, query[None, :])
    return int(indices[0]), float(distances[0])


def nearest_words(model: EmbeddingModel, queries: np.ndarray, workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Projeção exata em lote; resultado idêntico a nearest_word linha a linha"""
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != model.dim:
        found = queries.shape[-1] if queries.ndim else 0
        raise DimensionMismatchError(expected=model.dim, found=found)
    if not np.all(np.isfinite(queries)):
        raise EmbeddingDataError("Consulta com valores não finitos")

    if len(queries) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)

    starts = range(0, len(queries), QUERY_CHUNK)
    chunks = [queries[s:s + QUERY_CHUNK] for s in starts]

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda q: _nearest_block(model, q), chunks))
    else:
        results = [_nearest_block(model, q) for q in chunks]

    indices = np.concatenate([r[0] for r in results])
    distances = np.concatenate([r[1] for r in results])
    return indices, distances


def _nearest_block(model: EmbeddingModel, queries: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Varredura exata em blocos do vocabulário.

    A expansão ‖q‖² - 2q·v + ‖v‖² seleciona candidatos dentro de uma tolerância do
    mínimo corrente; os candidatos são recalculados pela diferença direta, de modo
    que o argmin e a distância retornados são exatos e o empate fica com o menor índice.
    """
    m = len(queries)
    q_sq = np.einsum("ij,ij->i", queries, queries)
    running_min = np.full(m, np.inf)
    best_sq = np.full(m, np.inf)
    best_idx = np.full(m, -1, dtype=np.int64)

    for start in range(0, model.size, VOCAB_CHUNK):
        block = model.vectors[start:start + VOCAB_CHUNK].astype(np.float64)
        b_sq = np.einsum("ij,ij->i", block, block)
        approx = np.matmul(queries, block.T)
        approx *= -2.0
        approx += q_sq[:, None]
        approx += b_sq[None, :]

        running_min = np.minimum(running_min, approx.min(axis=1))
        tolerance = 1e-9 * (q_sq + b_sq.max() + 1.0)
        rows, cols = np.nonzero(approx <= (running_min + tolerance)[:, None])

        diffs = queries[rows] - block[cols]
        exact_sq = np.sum(diffs * diffs, axis=1)

        # Menor distância exata por linha, menor índice em caso de empate
        order = np.lexsort((cols, exact_sq, rows))
        rows, cols, exact_sq = rows[order], cols[order], exact_sq[order]
        first = np.unique(rows, return_index=True)[1]
        rows, cols, exact_sq = rows[first], cols[first], exact_sq[first]

        better = exact_sq < best_sq[rows]
        best_sq[rows[better]] = exact_sq[better]
        best_idx[rows[better]] = cols[better] + start

    return best_idx, np.sqrt(best_sq)


def distances_from(model: EmbeddingModel, query: np.ndarray) -> np.ndarray:
    """Distâncias euclidianas exatas (float64) de query a todas as linhas"""
    query = np.asarray(query, dtype=np.float64)
    out = np.empty(model.size, dtype=np.float64)
    for start in range(0, model.size, VOCAB_CHUNK):
        block = model.vectors[start:start + VOCAB_CHUNK].astype(np.float64)
        out[start:start + len(block)] = np.sqrt(np.sum((block - query) ** 2, axis=1))
    return out


def k_nearest(model: EmbeddingModel, word: str, k: int) -> List[Tuple[int, float]]:
    """Os k vizinhos mais próximos de φ(word), excluindo a própria palavra"""
    index = model.index_of(word)
    if not 1 <= k <= model.size - 1:
        raise ConfigurationError(f"k={k} fora do intervalo [1, {model.size - 1}]")

    indices, distances = k_nearest_indices(model, index, k)
    return [(int(i), float(d)) for i, d in zip(indices, distances)]


def k_nearest_indices(model: EmbeddingModel, index: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    distances = distances_from(model, model.vectors[index])
    distances[index] = np.inf

    # Todos os empatados com o k-ésimo valor entram antes da ordenação estável
    threshold = np.partition(distances, k - 1)[k - 1]
    candidates = np.nonzero(distances <= threshold)[0]
    order = np.lexsort((candidates, distances[candidates]))
    chosen = candidates[order][:k]
    return chosen, distances[chosen]


def string_distance(model: EmbeddingModel, x: Sequence[str], x_prime: Sequence[str]) -> float:
    """d(x, x') = Σ_i ‖φ(w_i) - φ(w'_i)‖"""
    if len(x) != len(x_prime):
        raise SequenceLengthError(f"Sequências de tamanhos diferentes: {len(x)} e {len(x_prime)}")
    if not x:
        return 0.0

    a = model.vectors[model.indices_of(x)].astype(np.float64)
    b = model.vectors[model.indices_of(x_prime)].astype(np.float64)
    per_position = np.sqrt(np.sum((a - b) ** 2, axis=1))
    return math.fsum(per_position.tolist())


def shared_vocabulary(model_a: EmbeddingModel, model_b: EmbeddingModel) -> List[str]:
    """Palavras presentes nos dois modelos, na ordem do primeiro"""
    return [w for w in model_a.words if w in model_b]
