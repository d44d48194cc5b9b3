"""Import scanning commands."""

from pathlib import Path

import typer

from pypi_census.cli.commands.common import (
    BaseUrlOption,
    CacheOption,
    FixtureOption,
    JobsOption,
    LimitOption,
    RescanOption,
    StoreOption,
    execute,
    load_settings,
)
from pypi_census.cli.formatters import print_error, print_info, print_statements
from pypi_census.core.archive import decode_source
from pypi_census.core.imports import extract_file_imports
from pypi_census.core.pipeline import Stage


def scan_imports(
    fixture: FixtureOption = None,
    base_url: BaseUrlOption = None,
    store: StoreOption = None,
    cache_dir: CacheOption = None,
    jobs: JobsOption = None,
    limit: LimitOption = None,
    rescan: RescanOption = False,
) -> None:
    """Extract import statements from every unscanned release's sdist.

    Archives already in the cache are not downloaded again.
    """
    settings = load_settings(
        fixture=fixture, base_url=base_url, store=store, cache_dir=cache_dir, jobs=jobs
    )
    execute(settings, [Stage.SCAN], limit=limit, rescan=rescan)


def extract(
    file: Path = typer.Argument(..., help="Python source file to read"),
    show_stage: bool = typer.Option(
        False,
        "--stage",
        help="Report which extraction stage succeeded",
    ),
) -> None:
    """Print the import statements of one file as JSON lines."""
    try:
        data = file.read_bytes()
    except OSError as e:
        print_error(f"Cannot read {file}: {e}")
        raise typer.Exit(2) from None

    extraction = extract_file_imports(str(file), decode_source(data))
    print_statements(extraction)
    if show_stage:
        print_info(f"{file}: {extraction.stage.value}")
