"""Command: targets - List the reproduction targets."""

from __future__ import annotations

import click
from rich.table import Table

from cavity_memory.cli.shared.console import console
from cavity_memory.cli.shared.errors import fail
from cavity_memory.exceptions import CavityMemoryError
from cavity_memory.services.targets import list_targets, load_target


@click.command()
def targets() -> None:
    """List the canned targets accepted by `reproduce`.

    Examples:
        cavity-memory targets
    """
    table = Table(title="Reproduction Targets")
    table.add_column("Target", style="cyan", no_wrap=True)
    table.add_column("Protocols", style="magenta")
    table.add_column("Description")
    try:
        for name in list_targets():
            config = load_target(name)
            protocols = ", ".join(e.protocol for e in config.experiments)
            table.add_row(name, protocols, config.description)
    except CavityMemoryError as e:
        fail("Targets", e)
    console.print(table)
