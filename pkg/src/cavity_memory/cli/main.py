"""Main CLI entry point for cavity-memory."""

from __future__ import annotations

import logging
import os


# Keep figure output clean; CAVITY_MEMORY_DEBUG=1 shows everything
if os.environ.get("CAVITY_MEMORY_DEBUG") == "1":
    logging.basicConfig(level=logging.DEBUG)
else:
    logging.basicConfig(level=logging.WARNING)
    logging.getLogger("cavity_memory").setLevel(logging.CRITICAL)

import click

from cavity_memory import __version__
from cavity_memory.cli.commands.budget import budget
from cavity_memory.cli.commands.fit import fit
from cavity_memory.cli.commands.reproduce import reproduce
from cavity_memory.cli.commands.run import run
from cavity_memory.cli.commands.targets import targets
from cavity_memory.utils.logger import setup_logger


@click.group()
@click.version_option(version=__version__, prog_name="cavity-memory")
@click.option("--verbose", is_flag=True, help="Log integrator and fit diagnostics to stderr")
def cli(verbose: bool) -> None:
    """Cavity Memory - desk-scale simulator for a long-lived cavity qubit.

    Runs master-equation experiments, fits and loss budgets from JSON/YAML
    configurations and writes figure-ready CSV/JSON files.
    """
    if verbose:
        setup_logger("cavity_memory", level="DEBUG")


cli.add_command(run)
cli.add_command(reproduce)
cli.add_command(budget)
cli.add_command(fit)
cli.add_command(targets)


if __name__ == "__main__":
    cli()
