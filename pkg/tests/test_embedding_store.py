"""
Testes de leitura, cache binário e busca exata de vizinhos
"""
import struct

import numpy as np
import pytest

from src.models.data_models import LoadOptions
from src.models.embedding_model import EmbeddingModel
from src.models.errors import (
    ConfigurationError,
    CorruptCacheError,
    DimensionMismatchError,
    DuplicateTokenError,
    EmbeddingDataError,
    EmbeddingParseError,
    IncompatibleCacheError,
    SequenceLengthError,
    WordNotFoundError,
)
from src.services import embedding_store
from src.services.embedding_store import (
    CACHE_MAGIC,
    is_cache_file,
    k_nearest,
    load_cache,
    load_text_embeddings,
    nearest_word,
    nearest_words,
    save_cache,
    shared_vocabulary,
    string_distance,
    vector_of,
)

from .conftest import write_embeddings


# ---------------------------------------------------------------------------
# Texto
# ---------------------------------------------------------------------------

def test_load_text_glove_format(toy3_file):
    model = load_text_embeddings(toy3_file)
    assert model.words == ("a", "b", "c")
    assert model.dim == 2
    assert len(model) == 3
    assert "b" in model and "z" not in model
    assert model.vectors.dtype == np.float32
    np.testing.assert_array_equal(model.vectors[2], [1.0, 1.0])


def test_load_text_fasttext_header(tmp_path):
    path = write_embeddings(tmp_path / "ft.vec", ["x", "y"], [[0.5, 1.5, 2.5], [1, 2, 3]], header=True)
    model = load_text_embeddings(path, LoadOptions(expect_header=True))
    assert model.size == 2
    assert model.dim == 3


def test_fasttext_header_detected_without_flag(tmp_path):
    path = write_embeddings(tmp_path / "ft.vec", ["x", "y"], [[0.5, 1.5, 2.5], [1, 2, 3]], header=True)
    model = load_text_embeddings(path)
    assert model.words == ("x", "y")
    assert model.dim == 3


def test_numeric_first_row_is_data_when_dimension_differs(tmp_path):
    path = tmp_path / "num.txt"
    path.write_text("7 4\n8 5\n", encoding="utf-8")
    model = load_text_embeddings(path)
    assert model.words == ("7", "8")
    assert model.dim == 1
    np.testing.assert_array_equal(model.vectors[:, 0], [4.0, 5.0])


def test_dimension_mismatch_reports_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("a 1 2\nb 3 4\nc 5\n", encoding="utf-8")
    with pytest.raises(DimensionMismatchError) as excinfo:
        load_text_embeddings(path)
    assert excinfo.value.line_number == 3
    assert excinfo.value.expected == 2
    assert excinfo.value.found == 1


def test_malformed_number_is_parse_error(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("a 1 2\nb 3 x\n", encoding="utf-8")
    with pytest.raises(EmbeddingParseError) as excinfo:
        load_text_embeddings(path)
    assert excinfo.value.line_number == 2


def test_non_finite_value_rejected(tmp_path):
    path = tmp_path / "nan.txt"
    path.write_text("a 1 2\nb nan 4\n", encoding="utf-8")
    with pytest.raises(EmbeddingParseError):
        load_text_embeddings(path)


def test_duplicate_keep_first_and_error(tmp_path):
    path = tmp_path / "dup.txt"
    path.write_text("a 1 2\nb 3 4\na 5 6\n", encoding="utf-8")

    model = load_text_embeddings(path)
    assert model.words == ("a", "b")
    np.testing.assert_array_equal(model.vectors[0], [1.0, 2.0])

    with pytest.raises(DuplicateTokenError) as excinfo:
        load_text_embeddings(path, LoadOptions(on_duplicate="error"))
    assert excinfo.value.line_number == 3


def test_lowercase_merges_case_variants(tmp_path):
    path = tmp_path / "case.txt"
    path.write_text("Paris 1 2\nparis 3 4\nLondon 5 6\n", encoding="utf-8")
    model = load_text_embeddings(path, LoadOptions(lowercase=True))
    assert model.words == ("paris", "london")


def test_max_words_limits_vocabulary(tmp_path):
    path = write_embeddings(tmp_path / "many.txt", [f"w{i}" for i in range(10)], np.eye(10))
    model = load_text_embeddings(path, LoadOptions(max_words=4))
    assert model.words == ("w0", "w1", "w2", "w3")


def test_empty_file_is_data_error(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("", encoding="utf-8")
    with pytest.raises(EmbeddingDataError):
        load_text_embeddings(path)


def test_model_is_immutable(toy3_model):
    with pytest.raises(ValueError):
        toy3_model.vectors[0, 0] = 5.0


def test_vector_of_and_lookup(toy3_model):
    np.testing.assert_array_equal(vector_of(toy3_model, "b"), [0.0, 1.0])
    assert vector_of(toy3_model, "zzz") is None
    with pytest.raises(WordNotFoundError):
        toy3_model.index_of("zzz")


# ---------------------------------------------------------------------------
# Cache
# ---------------------------------------------------------------------------

def test_cache_roundtrip_bit_exact(tmp_path, random_model):
    path = tmp_path / "model.cache"
    save_cache(random_model, path)

    assert is_cache_file(path)
    loaded = load_cache(path)
    assert loaded.words == random_model.words
    assert loaded.name == random_model.name
    assert loaded.vectors.tobytes() == random_model.vectors.tobytes()


def test_cache_mmap_load(tmp_path, random_model):
    path = tmp_path / "model.cache"
    save_cache(random_model, path)

    loaded = load_cache(path, mmap=True)
    np.testing.assert_array_equal(loaded.vectors, random_model.vectors)
    assert not loaded.vectors.flags.writeable


def test_cache_unicode_tokens(tmp_path):
    model = EmbeddingModel(words=["ação", "日本", "x"], vectors=np.eye(3))
    path = tmp_path / "uni.cache"
    save_cache(model, path)
    assert load_cache(path).words == ("ação", "日本", "x")


def test_cache_wrong_magic(tmp_path, toy3_file):
    assert not is_cache_file(toy3_file)
    with pytest.raises(IncompatibleCacheError):
        load_cache(toy3_file)


def test_cache_wrong_version(tmp_path, toy3_model):
    path = tmp_path / "model.cache"
    save_cache(toy3_model, path)
    data = bytearray(path.read_bytes())
    struct.pack_into("<I", data, len(CACHE_MAGIC), 99)
    path.write_bytes(bytes(data))

    with pytest.raises(IncompatibleCacheError):
        load_cache(path)


def test_cache_truncated(tmp_path, toy3_model):
    path = tmp_path / "model.cache"
    save_cache(toy3_model, path)
    path.write_bytes(path.read_bytes()[:-3])

    with pytest.raises(CorruptCacheError):
        load_cache(path)


def test_cache_failed_write_leaves_no_file(tmp_path, toy3_model):
    target = tmp_path / "dir_target"
    target.mkdir()
    with pytest.raises(IsADirectoryError):
        save_cache(toy3_model, target)
    assert list(tmp_path.iterdir()) == [target]


def test_text_and_cache_agree_on_perturbed_queries(tmp_path, random_model):
    text_path = write_embeddings(tmp_path / "r.txt", random_model.words, random_model.vectors)
    cache_path = tmp_path / "r.cache"

    from_text = load_text_embeddings(text_path)
    save_cache(from_text, cache_path)
    from_cache = load_cache(cache_path)

    rng = np.random.default_rng(11)
    queries = from_text.vectors[rng.integers(0, from_text.size, 100)] + rng.normal(scale=0.5, size=(100, 8))
    idx_text, dist_text = nearest_words(from_text, queries)
    idx_cache, dist_cache = nearest_words(from_cache, queries)
    np.testing.assert_array_equal(idx_text, idx_cache)
    np.testing.assert_array_equal(dist_text, dist_cache)


# ---------------------------------------------------------------------------
# Consultas
# ---------------------------------------------------------------------------

def test_nearest_word_examples(toy3_model):
    assert nearest_word(toy3_model, np.array([0.9, 0.1]))[0] == 0
    index, distance = nearest_word(toy3_model, np.array([1.0, 1.0]))
    assert index == 2
    assert distance == 0.0


def test_nearest_word_tie_goes_to_lowest_index(toy3_model):
    # (0.5, 0.5) está à mesma distância de a, b e c
    assert nearest_word(toy3_model, np.array([0.5, 0.5]))[0] == 0


def test_nearest_word_of_own_vector_is_itself(random_model):
    indices, distances = nearest_words(random_model, random_model.vectors)
    np.testing.assert_array_equal(indices, np.arange(random_model.size))
    assert np.all(distances == 0.0)


def test_nearest_words_matches_brute_force(random_model):
    rng = np.random.default_rng(3)
    queries = rng.normal(scale=2.0, size=(500, 8))
    indices, distances = nearest_words(random_model, queries, workers=2)

    vectors = random_model.vectors.astype(np.float64)
    for q, i, d in zip(queries, indices, distances):
        full = np.sqrt(np.sum((vectors - q) ** 2, axis=1))
        assert i == int(np.argmin(full))
        assert d == full[i]


def test_nearest_word_dimension_mismatch(toy3_model):
    with pytest.raises(DimensionMismatchError):
        nearest_word(toy3_model, np.array([1.0, 2.0, 3.0]))


def test_k_nearest_excludes_self(toy3_model):
    neighbours = k_nearest(toy3_model, "a", 2)
    assert [i for i, _ in neighbours] == [2, 1]
    assert neighbours[0][1] == pytest.approx(1.0)
    assert neighbours[1][1] == pytest.approx(np.sqrt(2.0))


def test_k_nearest_out_of_range(toy3_model):
    with pytest.raises(ConfigurationError):
        k_nearest(toy3_model, "a", 3)
    with pytest.raises(ConfigurationError):
        k_nearest(toy3_model, "a", 0)


def test_string_distance(toy3_model):
    assert string_distance(toy3_model, ["a", "b"], ["a", "b"]) == 0.0
    assert string_distance(toy3_model, ["a", "b"], ["c", "c"]) == pytest.approx(2.0)
    with pytest.raises(SequenceLengthError):
        string_distance(toy3_model, ["a"], ["a", "b"])


def test_shared_vocabulary(toy3_model):
    other = EmbeddingModel(words=["c", "z", "a"], vectors=np.zeros((3, 4)))
    assert shared_vocabulary(toy3_model, other) == ["a", "c"]


def test_nearest_words_independent_of_chunk_sizes(monkeypatch, random_model):
    rng = np.random.default_rng(11)
    queries = rng.normal(scale=1.5, size=(700, 8))
    expected = nearest_words(random_model, queries)

    monkeypatch.setattr(embedding_store, "VOCAB_CHUNK", 7)
    monkeypatch.setattr(embedding_store, "QUERY_CHUNK", 16)
    indices, distances = nearest_words(random_model, queries, workers=3)
    np.testing.assert_array_equal(indices, expected[0])
    np.testing.assert_array_equal(distances, expected[1])


def test_k_nearest_matches_full_scan(random_model):
    vectors = random_model.vectors.astype(np.float64)
    for index in (0, 17, 150, 299):
        full = np.sqrt(np.sum((vectors - vectors[index]) ** 2, axis=1))
        full[index] = np.inf
        oracle = np.argsort(full, kind="stable")[:25]

        neighbours = k_nearest(random_model, random_model.words[index], 25)
        assert [i for i, _ in neighbours] == oracle.tolist()
        np.testing.assert_allclose([d for _, d in neighbours], full[oracle], rtol=1e-12)


def test_string_distance_triangle_inequality(random_model):
    rng = np.random.default_rng(5)
    words = random_model.words
    for a, b, c in rng.integers(0, random_model.size, size=(10_000, 3)):
        ab = string_distance(random_model, [words[a]], [words[b]])
        bc = string_distance(random_model, [words[b]], [words[c]])
        ac = string_distance(random_model, [words[a]], [words[c]])
        assert ac <= ab + bc + 1e-9


def test_string_distance_is_additive_over_positions(random_model):
    rng = np.random.default_rng(9)
    words = random_model.words
    x = [words[i] for i in rng.integers(0, random_model.size, size=12)]
    y = [words[i] for i in rng.integers(0, random_model.size, size=12)]
    per_position = sum(string_distance(random_model, [u], [v]) for u, v in zip(x, y))
    assert string_distance(random_model, x, y) == pytest.approx(per_position, rel=1e-12)
    assert string_distance(random_model, x, x) == 0.0
