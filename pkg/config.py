import logging
import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    # Embeddings
    EMBEDDINGS_DIR = os.getenv("EMBEDDINGS_DIR", "")

    # Mecanismo
    DEFAULT_EPSILON = float(os.getenv("DEFAULT_EPSILON", "10.0"))
    DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "0"))
    DEFAULT_WORKERS = int(os.getenv("DEFAULT_WORKERS", "1"))

    # Calibração
    DEFAULT_RUNS = int(os.getenv("DEFAULT_RUNS", "1000"))
    DEFAULT_ETA = float(os.getenv("DEFAULT_ETA", "0.01"))
    DEFAULT_SAMPLE_SIZE = int(os.getenv("DEFAULT_SAMPLE_SIZE", "1000"))

    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
    LOG_FILE = os.getenv("LOG_FILE", "")

    @classmethod
    def validate(cls):
        invalid_vars = []
        if not cls.DEFAULT_EPSILON > 0:
            invalid_vars.append("DEFAULT_EPSILON")
        if cls.DEFAULT_WORKERS < 1:
            invalid_vars.append("DEFAULT_WORKERS")
        if cls.DEFAULT_RUNS < 1:
            invalid_vars.append("DEFAULT_RUNS")
        if not 0 <= cls.DEFAULT_ETA < 1:
            invalid_vars.append("DEFAULT_ETA")
        if cls.DEFAULT_SAMPLE_SIZE < 1:
            invalid_vars.append("DEFAULT_SAMPLE_SIZE")
        if not isinstance(logging.getLevelName(cls.LOG_LEVEL), int):
            invalid_vars.append("LOG_LEVEL")
        if cls.EMBEDDINGS_DIR and not os.path.isdir(cls.EMBEDDINGS_DIR):
            invalid_vars.append("EMBEDDINGS_DIR")

        if invalid_vars:
            raise ValueError(f"Variáveis de ambiente inválidas: {', '.join(invalid_vars)}")

        return True
