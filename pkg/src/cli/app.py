"""
Linha de comando principal
"""
import argparse
import logging
import sys
from contextlib import contextmanager, nullcontext
from pathlib import Path
from typing import IO, Iterator, List, Optional, Sequence

from ..models.data_models import LoadOptions
from ..models.embedding_model import EmbeddingModel
from ..models.errors import ConfigurationError, EmbeddingDataError, SequenceLengthError
from ..services.embedding_store import is_cache_file, load_cache, load_text_embeddings
from ..services.verifier_service import DEFAULT_TV_THRESHOLD
from ..utils.formatters import format_help_message
from ..utils.output_writer import atomic_text_writer, write_text
from ..utils.validators import DUPLICATE_POLICIES, MUTATIONS, OOV_POLICIES, OUTPUT_FORMATS
from .command_handlers import (
    EXIT_DATA_ERROR,
    EXIT_INTERNAL_ERROR,
    EXIT_IO_ERROR,
    EXIT_USAGE_ERROR,
    CommandHandlers,
)

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Flags inválidas viram ConfigurationError (código 4) em vez de sys.exit(2)"""

    def error(self, message):
        raise ConfigurationError(message)


class PrivacyCli:
    """Linha de comando do toolkit de privacidade dχ"""

    def __init__(
        self,
        embeddings_dir: str = "",
        default_epsilon: float = 10.0,
        default_seed: int = 0,
        default_workers: int = 1,
        default_runs: int = 1000,
        default_eta: float = 0.01,
        default_sample_size: int = 1000,
        stdin: Optional[IO[str]] = None,
        stdout: Optional[IO[str]] = None,
        stderr: Optional[IO[str]] = None,
    ):
        self.embeddings_dir = embeddings_dir
        self.default_epsilon = default_epsilon
        self.default_seed = default_seed
        self.default_workers = default_workers
        self.default_runs = default_runs
        self.default_eta = default_eta
        self.default_sample_size = default_sample_size

        self.stdin = stdin if stdin is not None else sys.stdin
        self.stdout = stdout if stdout is not None else sys.stdout
        self.stderr = stderr if stderr is not None else sys.stderr

        self.parser = self._build_parser()
        self.command_handlers = CommandHandlers(self)

    # ------------------------------------------------------------------
    # Argumentos
    # ------------------------------------------------------------------

    def _build_parser(self) -> argparse.ArgumentParser:
        common = _ArgumentParser(add_help=False)
        common.add_argument("--embeddings", required=True, help="Arquivo de embeddings (texto ou cache binário)")
        common.add_argument("--seed", type=int, default=self.default_seed)
        common.add_argument("--workers", type=int, default=self.default_workers)
        common.add_argument("--format", choices=OUTPUT_FORMATS, default=None)
        common.add_argument("--output", default=None, help="Arquivo de saída (padrão: stdout)")
        common.add_argument("--header", action="store_true", help="Primeira linha é o cabeçalho fastText")
        common.add_argument("--lowercase", action="store_true")
        common.add_argument("--max-words", type=int, default=None)
        common.add_argument("--on-duplicate", choices=DUPLICATE_POLICIES, default="keep-first")
        common.add_argument("--mmap", action="store_true", help="Mapeia o bloco de vetores do cache em memória")

        parser = _ArgumentParser(
            prog="dxprivacy",
            description="Perturbação de texto com privacidade dχ sobre embeddings de palavras",
            epilog=format_help_message(),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        sub = parser.add_subparsers(dest="command")

        privatize = sub.add_parser("privatize", parents=[common], help="Aplica o mecanismo linha a linha")
        privatize.add_argument("--epsilon", type=float, default=self.default_epsilon)
        privatize.add_argument("--input", default=None, help="Corpus de entrada (padrão: stdin)")
        privatize.add_argument("--trace", default=None, help="Arquivo JSONL com os registros de perturbação")
        privatize.add_argument("--oov", choices=OOV_POLICIES, default="passthrough")

        calibrate = sub.add_parser("calibrate", parents=[common], help="Varredura de ε")
        calibrate.add_argument("--epsilons", "--epsilon", type=float, nargs="+", default=[self.default_epsilon])
        calibrate.add_argument("--runs", type=int, default=self.default_runs)
        calibrate.add_argument("--eta", type=float, default=self.default_eta)
        calibrate.add_argument("--no-eta", dest="eta", action="store_const", const=None)
        calibrate.add_argument("--sample-size", type=int, default=self.default_sample_size)
        calibrate.add_argument("--words", nargs="+", default=None, help="Palavras explícitas em vez da amostra")
        calibrate.add_argument("--bins", type=int, default=20)
        calibrate.add_argument("--min-support", type=int, default=None)
        calibrate.add_argument("--max-unchanged", type=int, default=None)

        knn = sub.add_parser("knn-stats", parents=[common], help="Percentis da distância ao k-ésimo vizinho")
        knn.add_argument("--ks", type=int, nargs="+", default=None)
        knn.add_argument("--percentiles", type=float, nargs="+", default=None)
        knn.add_argument("--sample-size", type=int, default=self.default_sample_size)
        knn.add_argument("--all-words", action="store_true", help="Analisa o vocabulário inteiro (custo quadrático)")

        audit = sub.add_parser("audit", parents=[common], help="Auditoria empírica da garantia dχ")
        audit.add_argument("--epsilon", type=float, default=self.default_epsilon)
        audit.add_argument("--samples", type=int, default=1_000_000)
        audit.add_argument("--min-count", type=int, default=100)
        audit.add_argument("--sigmas", type=float, default=3.0)
        audit.add_argument("--words", nargs="+", default=None)
        audit.add_argument("--mutation", choices=MUTATIONS, default=None)
        audit.add_argument("--composition", nargs=2, default=None, metavar="PALAVRA")
        audit.add_argument("--no-composition", action="store_true")
        audit.add_argument("--tv-threshold", type=float, default=DEFAULT_TV_THRESHOLD)

        sub.add_parser("cache", parents=[common], help="Grava o cache binário em --output")
        return parser

    # ------------------------------------------------------------------
    # Entrada e saída
    # ------------------------------------------------------------------

    def resolve_embedding_path(self, path: str) -> Path:
        """Caminho como dado ou relativo a EMBEDDINGS_DIR"""
        candidate = Path(path)
        if candidate.exists():
            return candidate
        if self.embeddings_dir and not candidate.is_absolute():
            fallback = Path(self.embeddings_dir) / candidate
            if fallback.exists():
                return fallback
        raise FileNotFoundError(f"Arquivo de embeddings não encontrado: {path}")

    def load_model(self, args: argparse.Namespace) -> EmbeddingModel:
        path = self.resolve_embedding_path(args.embeddings)
        if is_cache_file(path):
            return load_cache(path, mmap=args.mmap)
        opts = LoadOptions(
            expect_header=args.header,
            lowercase=args.lowercase,
            max_words=args.max_words,
            on_duplicate=args.on_duplicate,
        )
        return load_text_embeddings(path, opts)

    def read_input_lines(self, path: Optional[str]) -> List[str]:
        """Uma entrada por linha; a quebra final não gera linha vazia"""
        if path:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        else:
            text = self.stdin.read()

        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return [line.rstrip("\r") for line in lines]

    def emit(self, content: str, path: Optional[str] = None) -> None:
        if path:
            write_text(path, content)
        else:
            self.stdout.write(content)

    @contextmanager
    def output_stream(self, path: Optional[str] = None) -> Iterator[IO[str]]:
        """Arquivo gravado de forma atômica ou o stdout"""
        context = atomic_text_writer(path) if path else nullcontext(self.stdout)
        with context as out:
            yield out

    # ------------------------------------------------------------------
    # Execução
    # ------------------------------------------------------------------

    def run(self, argv: Sequence[str]) -> int:
        """Executa um subcomando e devolve o código de saída"""
        try:
            args = self.parser.parse_args(list(argv))
        except ConfigurationError as e:
            return self._fail(EXIT_USAGE_ERROR, f"Flags inválidas: {e}")
        except SystemExit as e:
            # --help
            return int(e.code or 0)

        if not args.command:
            self.stderr.write(self.parser.format_help())
            return EXIT_USAGE_ERROR

        try:
            model = self.load_model(args)
            return self.command_handlers.handle_command(args.command, args, model)
        except ConfigurationError as e:
            return self._fail(EXIT_USAGE_ERROR, f"Parâmetro inválido: {e}")
        except (EmbeddingDataError, SequenceLengthError, UnicodeDecodeError) as e:
            return self._fail(EXIT_DATA_ERROR, f"Erro nos dados: {e}")
        except OSError as e:
            return self._fail(EXIT_IO_ERROR, f"Erro de E/S: {e}")
        except Exception as e:
            logger.exception(f"Erro interno em '{args.command}'")
            self.stderr.write(f"Erro interno: {type(e).__name__}: {e}\n")
            return EXIT_INTERNAL_ERROR

    def _fail(self, code: int, message: str) -> int:
        logger.error(message)
        self.stderr.write(message + "\n")
        return code
