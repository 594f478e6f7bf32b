"""
Fixtures compartilhadas: modelos de brinquedo e arquivos de embeddings
"""
import itertools
import os
from pathlib import Path

import numpy as np
import pytest

from src.models.embedding_model import EmbeddingModel


def write_embeddings(path: Path, words, vectors, header: bool = False) -> Path:
    """Grava um arquivo texto no formato GloVe (ou fastText com header=True)"""
    vectors = np.asarray(vectors, dtype=np.float32)
    lines = []
    if header:
        lines.append(f"{len(words)} {vectors.shape[1]}")
    for word, vector in zip(words, vectors):
        lines.append(" ".join([word] + [repr(float(v)) for v in vector]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def toy3_model():
    """a=(1,0), b=(0,1), c=(1,1)"""
    return EmbeddingModel(words=["a", "b", "c"], vectors=[[1, 0], [0, 1], [1, 1]], name="toy3")


@pytest.fixture
def far_pair_model():
    """Duas palavras muito distantes: a=(0,0), b=(10,0)"""
    return EmbeddingModel(words=["a", "b"], vectors=[[0, 0], [10, 0]], name="far")


@pytest.fixture
def five_word_model():
    return EmbeddingModel(
        words=["p00", "p10", "p01", "p11", "p22"],
        vectors=[[0, 0], [1, 0], [0, 1], [1, 1], [2, 2]],
        name="five",
    )


@pytest.fixture
def circle_model():
    """Cinco pontos no círculo unitário; toda célula de Voronoi é ilimitada"""
    angles = 2 * np.pi * np.arange(5) / 5
    vectors = np.column_stack([np.cos(angles), np.sin(angles)])
    return EmbeddingModel(words=[f"c{i}" for i in range(5)], vectors=vectors, name="circle")


@pytest.fixture
def eight_word_model():
    """Oito pontos em 2-D com distâncias par a par em [0.5, 5]; w0, w1 e w2 colineares"""
    vectors = [
        [0.0, 0.0], [0.8, 0.0], [1.6, 0.0], [0.0, 1.2],
        [1.5, 1.5], [3.0, 0.5], [-1.0, 1.0], [2.5, 2.5],
    ]
    return EmbeddingModel(words=[f"w{i}" for i in range(8)], vectors=vectors, name="eight")


@pytest.fixture
def grid_model():
    """Grade 30 x 30 de espaçamento 1"""
    coords = list(itertools.product(range(30), range(30)))
    words = [f"g{x}_{y}" for x, y in coords]
    return EmbeddingModel(words=words, vectors=np.array(coords, dtype=np.float32), name="grid")


@pytest.fixture
def random_model():
    """300 palavras em 8 dimensões"""
    rng = np.random.default_rng(7)
    vectors = rng.normal(size=(300, 8)).astype(np.float32)
    return EmbeddingModel(words=[f"r{i}" for i in range(300)], vectors=vectors, name="random")


@pytest.fixture
def toy3_file(tmp_path, toy3_model):
    return write_embeddings(tmp_path / "toy3.txt", toy3_model.words, toy3_model.vectors)


@pytest.fixture
def eight_word_file(tmp_path, eight_word_model):
    return write_embeddings(tmp_path / "eight.txt", eight_word_model.words, eight_word_model.vectors)


@pytest.fixture
def glove_path():
    path = os.getenv("GLOVE_PATH")
    if not path or not Path(path).is_file():
        pytest.skip("GLOVE_PATH não aponta para um arquivo GloVe")
    return Path(path)
