"""Process-wide logger shared by the solver library and the benchmark CLI.

Modules call ``get_logger(__name__)`` at import time; the first call configures
the single instance and later names are ignored. The CLI adjusts the level and
attaches a per-run ``run.log`` once the output directory is known.
"""

import logging
import os
import sys
from typing import Optional, Union

LOG_LEVEL_ENV = "SLDG_LOG_LEVEL"

# Module-level variable to store the logger instance
_app_logger: Optional[logging.Logger] = None


def _resolve_level(level: Optional[Union[int, str]]) -> int:
    if level is None:
        level = os.getenv(LOG_LEVEL_ENV, "INFO")
    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            raise ValueError(f"Unknown log level: {level}")
        return resolved
    return int(level)


def get_logger(
    name: Optional[str] = None,
    log_file_path: Optional[str] = None,
    level: Optional[Union[int, str]] = None,
) -> logging.Logger:
    """Get or create the application logger.

    Only one logger instance exists for the application. If a logger has already
    been created it is returned unchanged; otherwise a new one is configured with
    a stdout handler and, optionally, a file handler.

    Args:
        name: Optional name for the logger, defaults to 'sldg'. Ignored once the
              logger exists.
        log_file_path: Optional path to a local log file. The directory is created
                       if needed. Ignored once the logger exists.
        level: Logging level (name or number). Defaults to ``SLDG_LOG_LEVEL`` or INFO.

    Returns:
        logging.Logger: The application logger instance.

    Raises:
        ValueError: If the level name is unknown.
        OSError: If the log directory cannot be created.
    """
    global _app_logger

    if _app_logger is not None:
        return _app_logger

    logger_name = name if name is not None else "sldg"
    _app_logger = logging.getLogger(logger_name)

    # Only configure if logger doesn't have handlers (avoid duplicate handlers)
    if not _app_logger.handlers:
        resolved = _resolve_level(level)
        _app_logger.setLevel(resolved)

        formatter = logging.Formatter(
            "%(asctime)s [%(levelname)s]: %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
        )
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(resolved)
        console_handler.setFormatter(formatter)
        _app_logger.addHandler(console_handler)

        if log_file_path:
            add_file_handler(log_file_path)

        # Prevent propagation to root logger to avoid duplicate logs
        _app_logger.propagate = False

    return _app_logger


def add_file_handler(log_file_path: str) -> None:
    """Attach a file handler to the existing application logger.

    Used by the CLI once a run's output directory is known.
    """
    logger = get_logger()
    target = os.path.abspath(log_file_path)
    for handler in logger.handlers:
        if isinstance(handler, logging.FileHandler) and handler.baseFilename == target:
            return

    log_dir = os.path.dirname(log_file_path)
    if log_dir and not os.path.exists(log_dir):
        os.makedirs(log_dir, exist_ok=True)

    file_handler = logging.FileHandler(log_file_path)
    file_handler.setLevel(logger.level)
    file_handler.setFormatter(logger.handlers[0].formatter)
    logger.addHandler(file_handler)


def set_level(level: Union[int, str]) -> None:
    """Change the level of the application logger and all of its handlers."""
    logger = get_logger()
    resolved = _resolve_level(level)
    logger.setLevel(resolved)
    for handler in logger.handlers:
        handler.setLevel(resolved)
