"""Logging for Surface Influence.

Every module logs below the ``surface_influence`` logger; the command line
front end turns the console handler off so stdout only carries results.
"""

import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

APP_LOGGER = "surface_influence"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logging(
    level: str = "INFO", log_file: Optional[str] = None, console_output: bool = True
) -> logging.Logger:
    """Configure the application logger.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log path; missing parent directories are created
        console_output: Whether to echo records on stdout

    Returns:
        The ``surface_influence`` logger
    """
    numeric = getattr(logging, level.upper())
    logger = logging.getLogger(APP_LOGGER)
    logger.setLevel(numeric)

    for handler in logger.handlers[:]:
        handler.close()
        logger.removeHandler(handler)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    if console_output:
        console = logging.StreamHandler(sys.stdout)
        console.setLevel(numeric)
        console.setFormatter(formatter)
        logger.addHandler(console)

    if log_file:
        try:
            path = Path(log_file).expanduser()
            path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(path)
            file_handler.setLevel(logging.DEBUG)  # file always gets everything
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError as e:
            logger.warning(f"Could not create log file {log_file}: {e}")

    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Logger ``surface_influence.<name>``, or the application logger."""
    if name:
        return logging.getLogger(f"{APP_LOGGER}.{name}")
    return logging.getLogger(APP_LOGGER)


@contextmanager
def log_duration(logger: logging.Logger, label: str, level: int = logging.DEBUG) -> Iterator[None]:
    """Log how long the enclosed block took, also when it raises."""
    start = time.perf_counter()
    try:
        yield
    finally:
        logger.log(level, f"{label} took {time.perf_counter() - start:.2f}s")
