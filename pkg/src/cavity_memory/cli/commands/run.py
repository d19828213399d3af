"""Command: run - Execute a run configuration and write its files."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any

import click
from rich.table import Table

from cavity_memory.cli.shared.console import console
from cavity_memory.cli.shared.errors import fail
from cavity_memory.cli.shared.options import run_options
from cavity_memory.exceptions import CavityMemoryError
from cavity_memory.models.config import CavityMemorySettings, RunConfig
from cavity_memory.services.runner import ExperimentRunner, RunSummary


logger = logging.getLogger(__name__)


def _scalar_rows(report: dict[str, Any], prefix: str = "") -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    for key, value in report.items():
        name = f"{prefix}{key}"
        if isinstance(value, bool) or value is None:
            continue
        if isinstance(value, (int, float)):
            rows.append((name, "inf" if math.isinf(value) else f"{value:.6g}"))
        elif isinstance(value, dict):
            rows.extend(_scalar_rows(value, f"{name}."))
    return rows


def print_summary(summary: RunSummary) -> None:
    """One table of scalar results per experiment, then the file list."""
    for stem, report in summary.reports.items():
        rows = _scalar_rows(report)
        if not rows:
            continue
        table = Table(title=stem, show_header=False)
        table.add_column("Quantity", style="cyan", no_wrap=True)
        table.add_column("Value", style="bold", justify="right")
        for name, value in rows:
            table.add_row(name, value)
        console.print(table)
    console.print(f"\n[green]✓[/green] Wrote {len(summary.files)} files to {summary.directory}")


def execute(
    config: RunConfig,
    out_dir: Path,
    threads: int | None,
    seed: int | None,
    tolerance_scale: float | None,
    command: str,
) -> RunSummary:
    """Run a validated configuration, mapping failures to exit code 4."""
    runner = ExperimentRunner(
        config, out_dir, threads=threads, seed=seed, tolerance_scale=tolerance_scale
    )
    try:
        with console.status("[bold]Running...[/bold]") as status:
            summary = runner.run(progress=lambda stem: status.update(f"[bold]Running {stem}...[/bold]"))
    except Exception as e:
        fail(command, e, code=4)
    print_summary(summary)
    return summary


@click.command()
@click.argument("config_path", type=click.Path(dir_okay=False, path_type=Path))
@run_options
def run(
    config_path: Path,
    out_dir: str | None,
    seed: int | None,
    threads: int | None,
    tolerance_scale: float | None,
) -> None:
    """Run every experiment of a configuration file.

    Writes one CSV per series, one JSON report per experiment and a
    manifest.json with the configuration hash and library versions.

    Exit codes: 2 unreadable file, 3 invalid configuration, 4 run failure.

    Examples:
        cavity-memory run fig5_desk.json --out results/fig5
        cavity-memory run table3.yaml --threads 4
    """
    console.print(f"⚙️  [bold]Run:[/bold] {config_path}\n")
    settings = CavityMemorySettings()
    try:
        config = RunConfig.load(config_path)
    except (ValueError, CavityMemoryError) as e:
        fail("Run", e)

    directory = Path(out_dir) if out_dir else config.output.directory or settings.output_dir
    execute(config, directory, threads or settings.threads, seed, tolerance_scale, "Run")
