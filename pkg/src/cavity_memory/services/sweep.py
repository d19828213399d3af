"""Ordered worker pool for sweep points.

Every sweep point owns an independent evolution, so points are dispatched to
a thread pool (scipy and numpy release the GIL in their kernels) and the
results are merged back in input order.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar


logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def default_threads() -> int:
    """Worker count from ``CAVITY_MEMORY_THREADS`` or the CPU count."""
    value = os.environ.get("CAVITY_MEMORY_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            logger.warning("Ignoring invalid CAVITY_MEMORY_THREADS=%r", value)
    return os.cpu_count() or 1


def parallel_map(
    func: Callable[[T], R],
    items: Iterable[T],
    threads: int | None = None,
) -> list[R]:
    """Apply ``func`` to every item, preserving input order.

    Args:
        func: Pure function of one sweep point
        items: Sweep points
        threads: Worker count; None uses :func:`default_threads`, 1 runs inline

    Returns:
        Results in the order of ``items``

    Raises:
        Whatever ``func`` raises for the first failing point (in input order)
    """
    points = list(items)
    workers = min(threads or default_threads(), max(len(points), 1))
    if workers <= 1:
        return [func(p) for p in points]
    logger.debug("Dispatching %d sweep points to %d workers", len(points), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, points))
