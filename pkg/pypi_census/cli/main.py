"""Main CLI entry point for pypi-census."""

import typer

from pypi_census import __version__
from pypi_census.cli.commands import fetch as fetch_cmd
from pypi_census.cli.commands import licenses as licenses_cmd
from pypi_census.cli.commands import run as run_cmd
from pypi_census.cli.commands import scan as scan_cmd
from pypi_census.cli.commands import stats as stats_cmd
from pypi_census.cli.commands.init import init_command
from pypi_census.cli.formatters import console
from pypi_census.log import configure_logging

# Create main app
app = typer.Typer(
    name="pypi-census",
    help="pypi-census: import, license and growth statistics for a Python package registry",
    add_completion=False,
    no_args_is_help=True,
)

app.command("init")(init_command)

# Pipeline stages
app.command("fetch-index")(fetch_cmd.fetch_index)
app.command("fetch-metadata")(fetch_cmd.fetch_metadata)
app.command("fetch-sdists")(fetch_cmd.fetch_sdists)
app.command("scan-imports")(scan_cmd.scan_imports)
app.command("resolve-licenses")(licenses_cmd.resolve_licenses)
app.command("stats")(stats_cmd.stats)
app.command("run")(run_cmd.run)

# Inspection
app.command("report")(stats_cmd.report)
app.command("extract")(scan_cmd.extract)


def _show_version(value: bool) -> None:
    if value:
        console.print(f"pypi-census {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    verbose: bool = typer.Option(
        False,
        "--verbose",
        "-v",
        help="Log debug detail to standard error",
    ),
    version: bool = typer.Option(
        False,
        "--version",
        callback=_show_version,
        is_eager=True,
        help="Show version and exit",
    ),
) -> None:
    """pypi-census: import, license and growth statistics for a Python package registry."""
    configure_logging(verbose)


if __name__ == "__main__":
    app()
