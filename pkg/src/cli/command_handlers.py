"""
Handlers dos subcomandos da linha de comando
"""
import argparse
import logging
from typing import TYPE_CHECKING, List, Optional

import numpy as np

from ..models.data_models import AuditConfig, MechanismConfig, RunConfig
from ..models.embedding_model import EmbeddingModel
from ..models.errors import ConfigurationError, CorruptCacheError
from ..services.calibration_service import CalibrationService, select_epsilon, worst_case_summary
from ..services.embedding_store import load_cache, save_cache
from ..services.geometry_service import DEFAULT_KS, DEFAULT_PERCENTILES, GeometryService
from ..services.mechanism import Mechanism
from ..services.noise_sampler import RandomStream
from ..services.verifier_service import COMPOSITION_STREAM, PrivacyVerifier
from ..utils.formatters import (
    format_audit_json,
    format_audit_summary,
    format_cache_summary,
    format_knn_csv,
    format_knn_json,
    format_knn_text,
    format_sweep_csv,
    format_sweep_json,
    format_worst_case_summary,
    sweep_to_frame,
)
from ..utils.output_writer import write_jsonl
from ..utils.tokenizer import detokenize, tokenize

if TYPE_CHECKING:
    from .app import PrivacyCli

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_AUDIT_FAILED = 1
EXIT_IO_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_USAGE_ERROR = 4
EXIT_INTERNAL_ERROR = 5


class CommandHandlers:
    """Handlers dos subcomandos"""

    def __init__(self, cli: "PrivacyCli"):
        self.cli = cli

    def handle_command(self, command: str, args: argparse.Namespace, model: EmbeddingModel) -> int:
        """Processa um subcomando e devolve o código de saída"""
        try:
            if command == "privatize":
                return self._handle_privatize_command(args, model)
            elif command == "calibrate":
                return self._handle_calibrate_command(args, model)
            elif command == "knn-stats":
                return self._handle_knn_stats_command(args, model)
            elif command == "audit":
                return self._handle_audit_command(args, model)
            elif command == "cache":
                return self._handle_cache_command(args, model)
            raise ConfigurationError(f"Comando não reconhecido: {command}")
        except Exception as e:
            logger.error(f"Erro ao processar comando {command}: {e}")
            raise

    @staticmethod
    def _run_config(command: str, args: argparse.Namespace, epsilons: Optional[List[float]] = None) -> RunConfig:
        return RunConfig(
            command=command,
            embedding_path=args.embeddings,
            epsilons=epsilons or [],
            seed=args.seed,
            runs=getattr(args, "runs", 1000),
            eta=getattr(args, "eta", None),
            sample_size=getattr(args, "sample_size", None),
            workers=args.workers,
            output_format=args.format or "csv",
            oov_policy=getattr(args, "oov", "passthrough"),
        )

    def _handle_privatize_command(self, args: argparse.Namespace, model: EmbeddingModel) -> int:
        """Comando privatize - uma linha de saída por linha de entrada"""
        run = self._run_config("privatize", args, [args.epsilon])
        config = MechanismConfig(
            epsilon=run.epsilon,
            oov_policy=run.oov_policy,
            record_trace=bool(args.trace),
        )
        mechanism = Mechanism(model, config, workers=run.workers)

        lines = self.cli.read_input_lines(args.input)
        results = mechanism.perturb_lines([tokenize(line) for line in lines], seed=run.seed)

        with self.cli.output_stream(args.output) as out:
            for tokens, _ in results:
                out.write(detokenize(tokens))
                out.write("\n")

        if args.trace:
            write_jsonl(args.trace, (record.to_dict() for _, records in results for record in records))

        if mechanism.oov_count:
            logger.warning(
                f"{mechanism.oov_count} token(s) fora do vocabulário tratados com a política '{run.oov_policy}'"
            )
        logger.info(f"{len(lines)} linha(s) processada(s) com ε={run.epsilon}")
        return EXIT_OK

    def _handle_calibrate_command(self, args: argparse.Namespace, model: EmbeddingModel) -> int:
        """Comando calibrate - varredura de ε com resumo de pior caso no stderr"""
        run = self._run_config("calibrate", args, args.epsilons)
        service = CalibrationService(model, workers=run.workers)

        if args.words:
            words = args.words
        else:
            words = service.sample_words(run.sample_size, run.seed)
            logger.info(f"Amostra de {len(words)} palavras sorteada com seed={run.seed}")

        sweep = service.sweep(run.epsilons, words, run.runs, run.seed, eta=run.eta, bins=args.bins)
        summaries = worst_case_summary(sweep)

        if run.output_format == "json":
            content = format_sweep_json(sweep, summaries)
        elif run.output_format == "text":
            content = sweep_to_frame(sweep).to_string(index=False) + "\n"
        else:
            content = format_sweep_csv(sweep)
        self.cli.emit(content, args.output)

        selected = None
        if args.min_support is not None or args.max_unchanged is not None:
            selected = select_epsilon(summaries, args.min_support, args.max_unchanged)
            if selected is None:
                logger.warning("Nenhum ε da grade atende aos limites pedidos")
        self.cli.stderr.write(format_worst_case_summary(summaries, selected) + "\n")
        return EXIT_OK

    def _handle_knn_stats_command(self, args: argparse.Namespace, model: EmbeddingModel) -> int:
        """Comando knn-stats - tabela de percentis da distância ao k-ésimo vizinho"""
        run = self._run_config("knn-stats", args)

        if args.ks:
            ks = args.ks
        else:
            ks = [k for k in DEFAULT_KS if k <= model.size - 1]
            if len(ks) < len(DEFAULT_KS):
                logger.warning(f"Lista padrão de k limitada a {ks} pelo vocabulário de {model.size} palavras")
            if not ks:
                raise ConfigurationError("O vocabulário precisa de ao menos duas palavras")

        words = None
        if args.all_words:
            logger.warning(f"knn-stats sobre o vocabulário inteiro: {model.size} palavras")
        else:
            words = CalibrationService(model).sample_words(run.sample_size, run.seed)

        table = GeometryService(model, workers=run.workers).knn_distance_table(
            ks, args.percentiles or DEFAULT_PERCENTILES, words
        )
        if run.output_format == "json":
            content = format_knn_json(table)
        elif run.output_format == "text":
            content = format_knn_text(table) + "\n"
        else:
            content = format_knn_csv(table)
        self.cli.emit(content, args.output)
        return EXIT_OK

    def _handle_audit_command(self, args: argparse.Namespace, model: EmbeddingModel) -> int:
        """Comando audit - todos os pares ordenados e, opcionalmente, a composição"""
        run = self._run_config("audit", args, [args.epsilon])
        if run.output_format == "csv" and args.format is not None:
            raise ConfigurationError("audit emite json ou text")

        cfg = AuditConfig(samples=args.samples, min_count=args.min_count, confidence_sigmas=args.sigmas)
        verifier = PrivacyVerifier(model, mutation=args.mutation)
        words = args.words or list(model.words)

        report = verifier.audit_all_pairs(run.epsilon, words, cfg, run.seed)

        composition = args.composition
        if composition is None and not args.no_composition and len(words) >= 2:
            composition = words[:2]
        if composition:
            report.compositions.append(verifier.audit_composition(
                run.epsilon, composition, cfg, RandomStream(run.seed, COMPOSITION_STREAM), args.tv_threshold
            ))

        if run.output_format == "text":
            content = format_audit_summary(report) + "\n"
        else:
            content = format_audit_json(report) + "\n"
        self.cli.emit(content, args.output)

        if not report.passed:
            logger.error(f"Auditoria reprovada para ε={run.epsilon}")
            return EXIT_AUDIT_FAILED
        return EXIT_OK

    def _handle_cache_command(self, args: argparse.Namespace, model: EmbeddingModel) -> int:
        """Comando cache - grava o cache binário e confere a releitura"""
        self._run_config("cache", args)
        if not args.output:
            raise ConfigurationError("cache exige --output com o caminho do arquivo de cache")

        save_cache(model, args.output)
        reloaded = load_cache(args.output)
        if reloaded.words != model.words or not np.array_equal(reloaded.vectors, model.vectors):
            raise CorruptCacheError(f"{args.output}: releitura difere do modelo gravado")

        info = {
            'arquivo': args.output,
            'nome': model.name,
            'palavras': model.size,
            'dimensão': model.dim,
        }
        self.cli.stdout.write(format_cache_summary(info) + "\n")
        return EXIT_OK
