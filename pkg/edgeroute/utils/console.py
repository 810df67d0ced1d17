"""Shared console helpers for Typer commands."""

from typing import NoReturn

import typer
from rich.console import Console
from rich.markup import escape
from rich.progress import Progress, SpinnerColumn, TextColumn

from edgeroute.errors import EXIT_DATA, EdgeRouteError


def fail(console: Console, err: BaseException) -> NoReturn:
    """Print err in red and exit with its code (OSError counts as a data error)."""
    console.print(f"[red]Error: {escape(str(err))}[/red]")
    if isinstance(err, EdgeRouteError):
        raise typer.Exit(err.exit_code)
    if isinstance(err, OSError):
        raise typer.Exit(EXIT_DATA)
    raise err


def spinner(console: Console) -> Progress:
    """Spinner progress bar with a task description, drawn on console."""
    return Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console)
