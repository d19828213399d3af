"""Command: budget - Evaluate the cavity loss budget of a configuration."""

from __future__ import annotations

import logging
import math
from pathlib import Path

import click
from rich.table import Table

from cavity_memory.cli.shared.console import console
from cavity_memory.cli.shared.errors import fail
from cavity_memory.exceptions import CavityMemoryError
from cavity_memory.models.config import CavityMemorySettings, RunConfig, read_document
from cavity_memory.services.runner import ExperimentRunner


logger = logging.getLogger(__name__)


def _lifetime(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.3g}"


@click.command()
@click.argument("config_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, path_type=str),
    default=None,
    help="Output directory (env: CAVITY_MEMORY_OUTPUT_DIR)",
)
def budget(config_path: Path, out_dir: str | None) -> None:
    """Evaluate the loss budget from the device, geometry and material blocks.

    Any experiments in the file are ignored; only the loss budget runs.
    Writes loss_budget.csv (channel, mitigation, κ/2π, lifetime),
    loss_budget.json and manifest.json.

    Examples:
        cavity-memory budget device.json
        cavity-memory budget stub_cavity.yaml --out results/stub
    """
    console.print(f"📉 [bold]Loss budget:[/bold] {config_path}\n")
    settings = CavityMemorySettings()
    try:
        data = read_document(config_path)
        data["experiments"] = [{"protocol": "loss_budget"}]
        config = RunConfig.from_dict(data)
    except (ValueError, CavityMemoryError) as e:
        fail("Budget", e)

    directory = Path(out_dir) if out_dir else config.output.directory or settings.output_dir
    try:
        summary = ExperimentRunner(config, directory).run()
    except Exception as e:
        fail("Budget", e, code=4)

    report = summary.reports["loss_budget"]
    published = {row["name"]: row for row in report.get("comparison", [])}
    table = Table(title="Cavity Loss Budget")
    table.add_column("Channel", style="cyan", no_wrap=True)
    table.add_column("κ/2π (Hz)", justify="right", style="bold")
    table.add_column("Lifetime (s)", justify="right")
    table.add_column("Reference (Hz)", justify="right", style="dim")
    table.add_column("Mitigation", style="dim")
    for channel in report["budget"]["channels"]:
        reference = published.get(channel["name"], {}).get("reference_hz", math.nan)
        table.add_row(
            channel["name"],
            f"{channel['kappa_over_2pi_hz']:.3g}",
            _lifetime(channel["lifetime_s"]),
            "" if math.isnan(reference) else f"{reference:.3g}",
            channel["mitigation"],
        )
    table.add_row(
        "[bold]total[/bold]",
        f"{report['budget']['total_kappa_over_2pi_hz']:.4g}",
        _lifetime(report["budget"]["total_lifetime_s"]),
        "",
        "",
    )
    console.print(table)
    console.print(f"\n[green]✓[/green] Wrote {len(summary.files)} files to {summary.directory}")
