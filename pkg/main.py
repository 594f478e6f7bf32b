import logging
import sys

from config import Config
from src.cli.app import PrivacyCli
from src.cli.command_handlers import EXIT_USAGE_ERROR


def setup_logging():
    """Configura logging estruturado; stdout fica reservado para a saída dos comandos"""
    handlers = [logging.StreamHandler(sys.stderr)]
    if Config.LOG_FILE:
        handlers.append(logging.FileHandler(Config.LOG_FILE, encoding="utf-8"))

    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )


logger = logging.getLogger(__name__)


def main(argv=None) -> int:
    """Função principal"""
    setup_logging()

    try:
        # Validar configuração
        Config.validate()
    except ValueError as e:
        logger.error(f"Erro de configuração: {e}")
        return EXIT_USAGE_ERROR

    cli = PrivacyCli(
        embeddings_dir=Config.EMBEDDINGS_DIR,
        default_epsilon=Config.DEFAULT_EPSILON,
        default_seed=Config.DEFAULT_SEED,
        default_workers=Config.DEFAULT_WORKERS,
        default_runs=Config.DEFAULT_RUNS,
        default_eta=Config.DEFAULT_ETA,
        default_sample_size=Config.DEFAULT_SAMPLE_SIZE,
    )
    return cli.run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Execução interrompida pelo usuário.")
        sys.exit(130)
