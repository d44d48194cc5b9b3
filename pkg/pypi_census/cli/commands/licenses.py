"""License resolution command."""

from pypi_census.cli.commands.common import (
    BaseUrlOption,
    CacheOption,
    FixtureOption,
    JobsOption,
    LimitOption,
    RateOption,
    RulesOption,
    StoreOption,
    execute,
    load_settings,
)
from pypi_census.core.pipeline import Stage


def resolve_licenses(
    fixture: FixtureOption = None,
    base_url: BaseUrlOption = None,
    store: StoreOption = None,
    cache_dir: CacheOption = None,
    jobs: JobsOption = None,
    rate_limit: RateOption = None,
    limit: LimitOption = None,
    rules: RulesOption = None,
) -> None:
    """Assign a normalized license to every stored package.

    Tries the license metadata field, then a LICENSE file from the
    package's repository, then its license classifiers.
    """
    settings = load_settings(
        fixture=fixture,
        base_url=base_url,
        store=store,
        cache_dir=cache_dir,
        jobs=jobs,
        rate_limit=rate_limit,
        rules=rules,
    )
    execute(settings, [Stage.LICENSES], limit=limit)
