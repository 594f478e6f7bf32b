"""
Gravação atômica de arquivos de saída
"""
import json
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import ContextManager, IO, Iterator, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@contextmanager
def _atomic_writer(path: PathLike, mode: str, **kwargs) -> Iterator[IO]:
    """Escreve em arquivo temporário no mesmo diretório e renomeia ao final"""
    path = Path(path)

    # Verificar se o diretório pai existe
    path.parent.mkdir(parents=True, exist_ok=True)

    # Verificar se o destino é um diretório
    if path.exists() and path.is_dir():
        raise IsADirectoryError(f"Não é possível gravar: '{path}' é um diretório")

    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=str(path.parent))
    try:
        with os.fdopen(fd, mode, **kwargs) as f:
            yield f
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        # Nenhuma saída parcial fica no destino
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def atomic_text_writer(path: PathLike) -> ContextManager[IO[str]]:
    return _atomic_writer(path, "w", encoding="utf-8", newline="")


def atomic_binary_writer(path: PathLike) -> ContextManager[IO[bytes]]:
    return _atomic_writer(path, "wb")


def write_text(path: PathLike, content: str) -> None:
    """Grava texto UTF-8 de forma atômica"""
    with atomic_text_writer(path) as f:
        f.write(content)
    logger.info(f"Saída gravada em {path}")


def write_jsonl(path: PathLike, records) -> None:
    """Grava um objeto JSON por linha de forma atômica"""
    count = 0
    with atomic_text_writer(path) as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False))
            f.write("\n")
            count += 1
    logger.info(f"{count} registros gravados em {path}")
