"""Statistics and report commands."""

import typer

from pypi_census.cli.commands.common import (
    EXIT_FAILURES,
    AuthorTermsOption,
    FixtureOption,
    FormatOption,
    IntervalsOption,
    LimitOption,
    OutOption,
    RulesOption,
    StoreOption,
    execute,
    load_settings,
)
from pypi_census.cli.formatters import print_error, print_report_table
from pypi_census.core.pipeline import Stage
from pypi_census.core.reports import read_report
from pypi_census.errors import CensusError


def stats(
    fixture: FixtureOption = None,
    store: StoreOption = None,
    output_format: FormatOption = None,
    out: OutOption = None,
    limit: LimitOption = None,
    rules: RulesOption = None,
    author_terms: AuthorTermsOption = None,
    cagr_intervals: IntervalsOption = False,
) -> None:
    """Compute every report table from the store and write one file per table."""
    settings = load_settings(
        fixture=fixture,
        store=store,
        output_format=output_format,
        out=out,
        rules=rules,
        author_terms=author_terms,
        cagr_intervals=cagr_intervals,
    )
    execute(settings, [Stage.STATS], limit=limit)


def report(
    name: str = typer.Argument(..., help="Report name, e.g. yearly_activity"),
    out: OutOption = None,
    fixture: FixtureOption = None,
) -> None:
    """Show a written report as a table.

    ``--fixture`` is accepted like on every other command; reports are read
    from the output directory either way.
    """
    settings = load_settings(fixture=fixture, out=out)
    try:
        entry, columns, rows = read_report(settings.output_dir, name)
    except CensusError as e:
        print_error(str(e))
        raise typer.Exit(EXIT_FAILURES) from None
    print_report_table(entry["title"], columns, rows)
