"""Logging configuration for cavity-memory.

Records go to stderr so series printed on stdout stay machine-readable.
Sweeps log from worker threads, hence the thread name in every record.
"""

from __future__ import annotations

import logging
import sys
from typing import TextIO


LOG_FORMAT = "%(asctime)s - %(name)s [%(threadName)s] - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def default_level() -> str:
    """Level implied by the environment: DEBUG when ``CAVITY_MEMORY_DEBUG`` is set."""
    from cavity_memory.models.config import CavityMemorySettings

    return "DEBUG" if CavityMemorySettings().debug else "INFO"


def setup_logger(
    name: str = "cavity_memory",
    level: str | None = None,
    log_file: str | None = None,
    stream: TextIO | None = None,
) -> logging.Logger:
    """Setup logging configuration.

    Integrator statistics and fit diagnostics are emitted at DEBUG, so
    ``level="DEBUG"`` is the setting to use when a run misbehaves.

    Args:
        name: Logger name
        level: Logging level (DEBUG, INFO, WARNING, ERROR); None reads
            the environment settings
        log_file: Optional file path for logging output
        stream: Console stream (default: stderr)

    Returns:
        Configured logger instance

    Raises:
        ValueError: If level is not a known logging level name
    """
    level = level or default_level()
    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        raise ValueError(f"Unknown log level: {level}")

    logger = logging.getLogger(name)
    logger.setLevel(numeric_level)

    # Remove existing handlers
    logger.handlers.clear()

    console_handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    console_handler.setLevel(numeric_level)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def get_logger(name: str = "cavity_memory") -> logging.Logger:
    """Get logger instance.

    Args:
        name: Logger name

    Returns:
        Logger instance
    """
    return logging.getLogger(name)
