"""Rich formatting utilities for CLI output.

Messages go to standard error; report tables and extracted statements go
to standard output.
"""

import json
from typing import Iterable

import typer
from rich.console import Console
from rich.table import Table

from pypi_census.core.imports import FileExtraction
from pypi_census.core.pipeline import RunResult
from pypi_census.log import stderr_console

console = Console()


def print_success(message: str) -> None:
    """Print a success message."""
    stderr_console.print(f"[green]{message}[/green]")


def print_error(message: str) -> None:
    """Print an error message."""
    stderr_console.print(f"[red]Error:[/red] {message}")


def print_warning(message: str) -> None:
    """Print a warning message."""
    stderr_console.print(f"[yellow]Warning:[/yellow] {message}")


def print_info(message: str) -> None:
    """Print an info message."""
    stderr_console.print(f"[blue]{message}[/blue]")


def print_stage_summary(result: RunResult) -> None:
    """Print one row per executed stage."""
    table = Table(title="Stages", show_header=True, header_style="bold")
    table.add_column("Stage", style="cyan")
    table.add_column("Processed", justify="right")
    table.add_column("Failed", justify="right")

    for stage in result.stages:
        failed = f"[red]{stage.failed}[/red]" if stage.failed else "0"
        table.add_row(stage.stage.value, str(stage.processed), failed)

    stderr_console.print(table)


def print_report_table(title: str, columns: list[str], rows: Iterable[list[str]]) -> None:
    """Render a written report on standard output."""
    table = Table(title=title, show_header=True, header_style="bold")
    for i, column in enumerate(columns):
        table.add_column(column, style="cyan" if i == 0 else None, justify="left" if i == 0 else "right")
    for row in rows:
        table.add_row(*row)
    console.print(table)


def print_statements(extraction: FileExtraction) -> None:
    """One JSON object per statement, on standard output."""
    for stmt in extraction.statements:
        typer.echo(json.dumps(stmt.to_dict(), ensure_ascii=False))
