"""Options shared by the commands that run experiments."""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

import click


def run_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """--out, --seed, --threads and --tolerance-scale."""
    func = click.option(
        "--tolerance-scale",
        type=click.FloatRange(min=0.0, min_open=True),
        default=None,
        help="Multiply integrator tolerances by this factor",
    )(func)
    func = click.option(
        "--threads",
        type=click.IntRange(min=1),
        default=None,
        help="Worker threads for sweeps (env: CAVITY_MEMORY_THREADS)",
    )(func)
    func = click.option(
        "--seed",
        type=click.IntRange(min=0, max=2**64 - 1),
        default=None,
        help="Seed for synthetic measurement noise",
    )(func)
    func = click.option(
        "--out",
        "out_dir",
        type=click.Path(file_okay=False, path_type=str),
        default=None,
        help="Output directory (env: CAVITY_MEMORY_OUTPUT_DIR)",
    )(func)
    return func
