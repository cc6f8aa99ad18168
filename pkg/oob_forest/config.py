"""
Runtime settings
Read once from the environment (and a .env file when present); CLI flags override them.
"""

import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()


class Settings(BaseModel):
    """Defaults shared by every command"""
    threads: int = Field(1, ge=1)
    log_dir: str = "logs"
    log_to_file: bool = False
    output_dir: str = "output"
    seed: int = Field(20240101, ge=0)
    trees: int = Field(500, ge=1)
    bootstrap_replicates: int = Field(1000, ge=2)


def _env_bool(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Build settings from OOBF_* environment variables"""
    return Settings(
        threads=int(os.getenv("OOBF_THREADS", "1")),
        log_dir=os.getenv("OOBF_LOG_DIR", "logs"),
        log_to_file=_env_bool("OOBF_LOG_TO_FILE"),
        output_dir=os.getenv("OOBF_OUTPUT_DIR", "output"),
        seed=int(os.getenv("OOBF_SEED", "20240101")),
        trees=int(os.getenv("OOBF_TREES", "500")),
        bootstrap_replicates=int(os.getenv("OOBF_BOOTSTRAP_REPLICATES", "1000")),
    )
