"""Command: fit - Fit a model to a CSV series."""

from __future__ import annotations

import logging
from pathlib import Path

import click
from rich.table import Table

from cavity_memory.cli.shared.console import console
from cavity_memory.cli.shared.errors import fail
from cavity_memory.services.analysis.fitting import FITTERS
from cavity_memory.services.runner import read_series_csv, write_json


logger = logging.getLogger(__name__)


def _column(header: list[str], selector: str) -> int:
    if selector in header:
        return header.index(selector)
    try:
        index = int(selector)
    except ValueError:
        raise ValueError(f"No column '{selector}' in {', '.join(header)}") from None
    if not 0 <= index < len(header):
        raise ValueError(f"Column index {index} out of range (0-{len(header) - 1})")
    return index


@click.command()
@click.argument("model", type=click.Choice(sorted(FITTERS)))
@click.argument("csv_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--x", "x_column", default="0", help="x column name or index")
@click.option("--y", "y_column", default="1", help="y column name or index")
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, path_type=str),
    default=None,
    help="Write <csv stem>_<model>_fit.json into this directory",
)
def fit(model: str, csv_path: Path, x_column: str, y_column: str, out_dir: str | None) -> None:
    """Fit MODEL to two columns of a CSV file (header row required).

    Exit codes: 2 unreadable file, 4 fit failure.

    Examples:
        cavity-memory fit exponential results/fig3/t1.csv
        cavity-memory fit cat_cut results/fig4/wigner_cut_S64.csv --out fits
    """
    console.print(f"📈 [bold]Fit {model}:[/bold] {csv_path}\n")
    try:
        header, data = read_series_csv(csv_path)
        x = data[:, _column(header, x_column)]
        y = data[:, _column(header, y_column)]
    except (ValueError, OSError) as e:
        fail("Fit", e)

    try:
        result = FITTERS[model](x, y)
    except Exception as e:
        fail("Fit", e, code=4)

    table = Table(title=f"{model} fit")
    table.add_column("Parameter", style="cyan", no_wrap=True)
    table.add_column("Value", justify="right", style="bold")
    table.add_column("± 1σ", justify="right", style="dim")
    for name, value in result.parameters.items():
        table.add_row(name, f"{value:.6g}", f"{result.uncertainties.get(name, float('nan')):.2g}")
    for name, value in result.derived.items():
        table.add_row(name, f"{value:.6g}", "")
    console.print(table)
    if not result.converged:
        console.print("[yellow]Fit did not converge; parameters are unusable[/yellow]")

    if out_dir:
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{csv_path.stem}_{model}_fit.json"
        write_json(path, result.to_dict())
        console.print(f"\n[green]✓[/green] Wrote {path}")
    if not result.converged:
        raise SystemExit(4)
