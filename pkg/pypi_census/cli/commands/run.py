"""Full pipeline command."""

import typer

from pypi_census.cli.commands.common import (
    EXIT_USAGE,
    AuthorTermsOption,
    BaseUrlOption,
    CacheOption,
    FixtureOption,
    FormatOption,
    IntervalsOption,
    JobsOption,
    LimitOption,
    OutOption,
    RateOption,
    RescanOption,
    RulesOption,
    StoreOption,
    UserAgentOption,
    execute,
    load_settings,
)
from pypi_census.cli.formatters import print_error
from pypi_census.core.pipeline import STAGE_ORDER, parse_stages
from pypi_census.errors import UsageError


def run(
    stages: str = typer.Option(
        ",".join(s.value for s in STAGE_ORDER),
        "--stages",
        help="Comma-separated stages, in pipeline order",
    ),
    fixture: FixtureOption = None,
    base_url: BaseUrlOption = None,
    store: StoreOption = None,
    cache_dir: CacheOption = None,
    jobs: JobsOption = None,
    rate_limit: RateOption = None,
    user_agent: UserAgentOption = None,
    limit: LimitOption = None,
    rules: RulesOption = None,
    author_terms: AuthorTermsOption = None,
    output_format: FormatOption = None,
    out: OutOption = None,
    cagr_intervals: IntervalsOption = False,
    rescan: RescanOption = False,
) -> None:
    """Run several stages in one go (all of them by default)."""
    try:
        selected = parse_stages(stages)
    except UsageError as e:
        print_error(str(e))
        raise typer.Exit(EXIT_USAGE) from None

    settings = load_settings(
        fixture=fixture,
        base_url=base_url,
        store=store,
        cache_dir=cache_dir,
        jobs=jobs,
        rate_limit=rate_limit,
        user_agent=user_agent,
        rules=rules,
        author_terms=author_terms,
        output_format=output_format,
        out=out,
        cagr_intervals=cagr_intervals,
    )
    execute(settings, selected, limit=limit, rescan=rescan)
