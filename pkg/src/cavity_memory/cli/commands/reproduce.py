"""Command: reproduce - Run the canned configuration of a figure or table."""

from __future__ import annotations

import logging
from pathlib import Path

import click

from cavity_memory.cli.commands.run import execute
from cavity_memory.cli.shared.console import console
from cavity_memory.cli.shared.errors import fail
from cavity_memory.cli.shared.options import run_options
from cavity_memory.exceptions import CavityMemoryError
from cavity_memory.models.config import CavityMemorySettings
from cavity_memory.services.targets import load_target


logger = logging.getLogger(__name__)


@click.command()
@click.argument("target")
@run_options
def reproduce(
    target: str,
    out_dir: str | None,
    seed: int | None,
    threads: int | None,
    tolerance_scale: float | None,
) -> None:
    """Reproduce a figure or table target at desk scale.

    Output goes to <out>/<target> (default results/<target>).
    Run `cavity-memory targets` for the list.

    Examples:
        cavity-memory reproduce table3
        cavity-memory reproduce fig5 --threads 8 --out runs
    """
    console.print(f"🔁 [bold]Reproduce:[/bold] {target}\n")
    settings = CavityMemorySettings()
    try:
        config = load_target(target)
    except CavityMemoryError as e:
        fail("Reproduce", e)

    base = Path(out_dir) if out_dir else settings.output_dir
    execute(config, base / target, threads or settings.threads, seed, tolerance_scale, "Reproduce")
