import logging
import sys
from pathlib import Path

from .config import settings


def setup_logging() -> logging.Logger:
    """
    Configure logging for the library and the command-line tool.
    Returns a configured logger instance.
    """
    logger = logging.getLogger("branchsys")
    log_level = getattr(logging, settings.LOG_LEVEL)
    logger.setLevel(log_level)

    console_format = logging.Formatter("%(levelname)s - %(message)s")
    file_format = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    # stdout is left to command output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(console_format)

    # Remove existing handlers to avoid duplicates
    logger.handlers.clear()
    logger.addHandler(console_handler)

    if settings.LOG_FILE:
        log_dir = Path(settings.LOG_DIR)
        log_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_dir / settings.LOG_FILE)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(file_format)
        logger.addHandler(file_handler)

    # Prevent propagation to root logger
    logger.propagate = False

    return logger


# Create and export logger instance
logger = setup_logging()
