"""CLI commands for cavity-memory."""

# Note: cli is exposed via entry point (cavity_memory.cli.main:cli),
# not package import, so `python -m cavity_memory.cli.main` imports it once

__all__: list[str] = []
