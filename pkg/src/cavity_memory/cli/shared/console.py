"""Shared Rich console instance for all CLI commands."""

from rich.console import Console


# Single console so every command formats the same way. Reported values
# (rates, times, Q factors) print unhighlighted so they read as plain numbers.
console = Console(highlight=False)
