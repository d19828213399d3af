"""Utility functions and helpers for cavity-memory."""

from cavity_memory.utils.logger import get_logger, setup_logger


__all__ = ["setup_logger", "get_logger"]
