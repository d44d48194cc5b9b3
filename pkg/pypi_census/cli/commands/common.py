"""Options and helpers shared by the pipeline commands."""

from pathlib import Path
from typing import Annotated, Optional, Sequence

import typer
from pydantic import ValidationError

from pypi_census.cli.formatters import print_error, print_stage_summary, print_success
from pypi_census.config import CensusSettings
from pypi_census.core.pipeline import CensusPipeline, RunConfig, Stage
from pypi_census.errors import CensusError, SchemaMismatchError, UsageError

EXIT_FAILURES = 1
EXIT_USAGE = 2
EXIT_SCHEMA = 3

FixtureOption = Annotated[
    Optional[Path],
    typer.Option("--fixture", help="Read the registry from a fixture directory (no network)"),
]
BaseUrlOption = Annotated[Optional[str], typer.Option("--base-url", help="Registry base URL")]
StoreOption = Annotated[Optional[Path], typer.Option("--store", help="Path of the SQLite store file")]
CacheOption = Annotated[Optional[Path], typer.Option("--cache-dir", help="Download cache directory")]
JobsOption = Annotated[Optional[int], typer.Option("--jobs", "-j", help="Worker threads for every pool")]
RateOption = Annotated[
    Optional[float], typer.Option("--rate-limit", help="Requests per second in live mode")
]
UserAgentOption = Annotated[Optional[str], typer.Option("--user-agent", help="HTTP User-Agent header")]
LimitOption = Annotated[
    Optional[int], typer.Option("--limit", help="Process only the first N listed packages")
]
RulesOption = Annotated[Optional[Path], typer.Option("--rules", help="License rule file (TSV)")]
AuthorTermsOption = Annotated[
    Optional[Path], typer.Option("--author-terms", help="Organization word list (YAML)")
]
FormatOption = Annotated[Optional[str], typer.Option("--format", help="Report format: csv or json")]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Report output directory")]
IntervalsOption = Annotated[
    bool,
    typer.Option("--cagr-intervals", help="Use the interval count (n-1) as the growth exponent"),
]
RescanOption = Annotated[bool, typer.Option("--rescan", help="Scan releases that were scanned before")]


def load_settings(
    fixture: Optional[Path] = None,
    base_url: Optional[str] = None,
    store: Optional[Path] = None,
    cache_dir: Optional[Path] = None,
    jobs: Optional[int] = None,
    rate_limit: Optional[float] = None,
    user_agent: Optional[str] = None,
    rules: Optional[Path] = None,
    author_terms: Optional[Path] = None,
    output_format: Optional[str] = None,
    out: Optional[Path] = None,
    cagr_intervals: bool = False,
) -> CensusSettings:
    """Settings from the config file and environment with CLI flags on top.

    Exits with status 2 on conflicting or invalid values.
    """
    if fixture is not None and base_url is not None:
        print_error("--fixture and --base-url are mutually exclusive")
        raise typer.Exit(EXIT_USAGE)
    try:
        return CensusSettings.load(
            fixture_root=fixture,
            base_url=base_url,
            store_path=store,
            cache_dir=cache_dir,
            jobs=jobs,
            rate_limit=rate_limit,
            user_agent=user_agent,
            rules_path=rules,
            author_terms_path=author_terms,
            output_format=output_format,
            output_dir=out,
            cagr_inclusive=False if cagr_intervals else None,
        )
    except ValidationError as e:
        print_error(f"Invalid configuration: {e}")
        raise typer.Exit(EXIT_USAGE) from None


def execute(
    settings: CensusSettings,
    stages: Sequence[Stage],
    limit: Optional[int] = None,
    rescan: bool = False,
) -> None:
    """Run stages and translate the outcome into an exit status."""
    try:
        config = RunConfig.from_settings(settings, stages, limit=limit, rescan=rescan or None)
        with CensusPipeline(config, settings) as pipeline:
            result = pipeline.run()
    except UsageError as e:
        print_error(str(e))
        raise typer.Exit(EXIT_USAGE) from None
    except SchemaMismatchError as e:
        print_error(str(e))
        raise typer.Exit(EXIT_SCHEMA) from None
    except CensusError as e:
        print_error(str(e))
        raise typer.Exit(EXIT_FAILURES) from None

    print_stage_summary(result)
    code = result.exit_code(settings.failure_threshold)
    if code:
        print_error(
            f"More than {settings.failure_threshold:.0%} of items failed in at least one stage"
        )
        raise typer.Exit(code)
    for stage in result.stages:
        for path in stage.outputs[-1:]:
            print_success(f"Reports written to {path.parent}")
