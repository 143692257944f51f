"""Utilities package for the application."""

from .config import apply_overrides, read_config
from .logger import get_logger
from .parallel import map_chunks

__all__ = ["read_config", "apply_overrides", "get_logger", "map_chunks"]
