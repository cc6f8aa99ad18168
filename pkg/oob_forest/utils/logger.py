"""
Logging configuration for the OOB forest toolkit

Messages go to stderr so that result tables printed by the CLI stay alone on
stdout. A dated log file is added when OOBF_LOG_TO_FILE is set.
"""
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

from oob_forest.config import get_settings

LOG_FORMAT = '[%(asctime)s] %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logger(name: str = "oob_forest", log_to_file: Optional[bool] = None) -> logging.Logger:
    """
    Configure and return a logger instance

    Args:
        name: Logger name
        log_to_file: Also write oob_forest_<date>.log under the configured log
            directory. None defers to settings.log_to_file.

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    settings = get_settings()
    logger.setLevel(logging.DEBUG)
    logger.propagate = False
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.INFO)
    console.setFormatter(formatter)
    logger.addHandler(console)

    if settings.log_to_file if log_to_file is None else log_to_file:
        log_dir = Path(settings.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"{name}_{datetime.now().strftime('%Y-%m-%d')}.log"
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def set_verbosity(verbose: bool) -> None:
    """Console at DEBUG when verbose, INFO otherwise; the log file always gets DEBUG"""
    for handler in logger.handlers:
        if not isinstance(handler, logging.FileHandler):
            handler.setLevel(logging.DEBUG if verbose else logging.INFO)


logger = setup_logger()
