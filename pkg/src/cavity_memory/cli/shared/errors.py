"""Exit codes and the failure path shared by every command."""

from __future__ import annotations

import logging
from typing import NoReturn

from rich.markup import escape

from cavity_memory.cli.shared.console import console
from cavity_memory.exceptions import ConfigValidationError, UnknownTargetError


logger = logging.getLogger(__name__)

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4


def exit_code_for(error: BaseException) -> int:
    """2 for unreadable input, 3 for rejected configuration, 4 otherwise."""
    if isinstance(error, (ConfigValidationError, UnknownTargetError)):
        return EXIT_VALIDATION
    if isinstance(error, (ValueError, OSError)):
        return EXIT_PARSE
    return EXIT_RUNTIME


def fail(command: str, error: BaseException, code: int | None = None) -> NoReturn:
    """Print the error, log the traceback and exit."""
    console.print(f"[red]{command} failed: {escape(str(error))}[/red]")
    if isinstance(error, ConfigValidationError) and error.locations:
        for location in error.locations:
            console.print(f"  • [yellow]{escape(location)}[/yellow]")
    logger.exception("%s failed", command)
    raise SystemExit(exit_code_for(error) if code is None else code)
