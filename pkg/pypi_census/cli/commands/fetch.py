"""Registry fetch commands: index, metadata and sdists."""

from pypi_census.cli.commands.common import (
    AuthorTermsOption,
    BaseUrlOption,
    CacheOption,
    FixtureOption,
    JobsOption,
    LimitOption,
    RateOption,
    RescanOption,
    StoreOption,
    UserAgentOption,
    execute,
    load_settings,
)
from pypi_census.core.pipeline import Stage


def fetch_index(
    fixture: FixtureOption = None,
    base_url: BaseUrlOption = None,
    store: StoreOption = None,
    cache_dir: CacheOption = None,
    rate_limit: RateOption = None,
    user_agent: UserAgentOption = None,
) -> None:
    """Fetch the registry's package list into the store."""
    settings = load_settings(
        fixture=fixture,
        base_url=base_url,
        store=store,
        cache_dir=cache_dir,
        rate_limit=rate_limit,
        user_agent=user_agent,
    )
    execute(settings, [Stage.INDEX])


def fetch_metadata(
    fixture: FixtureOption = None,
    base_url: BaseUrlOption = None,
    store: StoreOption = None,
    cache_dir: CacheOption = None,
    jobs: JobsOption = None,
    rate_limit: RateOption = None,
    user_agent: UserAgentOption = None,
    limit: LimitOption = None,
    author_terms: AuthorTermsOption = None,
) -> None:
    """Fetch and store metadata for every listed package.

    Packages that disappeared from the registry are stored as gone.
    """
    settings = load_settings(
        fixture=fixture,
        base_url=base_url,
        store=store,
        cache_dir=cache_dir,
        jobs=jobs,
        rate_limit=rate_limit,
        user_agent=user_agent,
        author_terms=author_terms,
    )
    execute(settings, [Stage.METADATA], limit=limit)


def fetch_sdists(
    fixture: FixtureOption = None,
    base_url: BaseUrlOption = None,
    store: StoreOption = None,
    cache_dir: CacheOption = None,
    jobs: JobsOption = None,
    rate_limit: RateOption = None,
    user_agent: UserAgentOption = None,
    limit: LimitOption = None,
    rescan: RescanOption = False,
) -> None:
    """Download one source archive per unscanned release into the cache."""
    settings = load_settings(
        fixture=fixture,
        base_url=base_url,
        store=store,
        cache_dir=cache_dir,
        jobs=jobs,
        rate_limit=rate_limit,
        user_agent=user_agent,
    )
    execute(settings, [Stage.SDISTS], limit=limit, rescan=rescan)
