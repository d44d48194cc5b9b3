"""Exception hierarchy for pypi-census.

Per-item errors (a gone package, a corrupt archive, a failed download) are
caught by the pipeline, logged and counted. Only usage and store errors stop
a run.
"""

from typing import Optional


class CensusError(Exception):
    """Base class for all pypi-census errors."""


class InvalidNameError(CensusError, ValueError):
    """A package name cannot be normalized."""


class UsageError(CensusError):
    """The run configuration is invalid or stages are out of order."""


# Registry


class FetchError(CensusError):
    """A registry resource could not be retrieved after all retries."""

    def __init__(self, message: str, url: Optional[str] = None):
        super().__init__(message)
        self.url = url


class NotFoundError(FetchError):
    """The registry answered 404 for a resource."""


class ParseError(CensusError):
    """A registry document could not be parsed."""


class IndexParseError(ParseError):
    """The package index document is malformed."""


class MetadataParseError(ParseError):
    """A package metadata document is malformed."""

    def __init__(self, package: str, message: str):
        super().__init__(f"{package}: {message}")
        self.package = package


class IntegrityError(CensusError):
    """Downloaded bytes do not match the size or digest the registry reports."""


# Archives


class ArchiveError(CensusError):
    """An archive is corrupt, unsupported or exceeds the decompression cap."""

    def __init__(
        self,
        message: str,
        package: Optional[str] = None,
        release: Optional[str] = None,
    ):
        identity = "/".join(part for part in (package, release) if part)
        super().__init__(f"{identity}: {message}" if identity else message)
        self.package = package
        self.release = release


class EntryNotFoundError(ArchiveError, LookupError):
    """A requested entry is not present in the archive."""


# Classifiers


class MalformedLabelError(CensusError, ValueError):
    """A trove classifier label has an empty segment."""


# Statistics


class StatisticError(CensusError, ValueError):
    """A statistic is undefined for its input."""


class UndefinedRateError(StatisticError):
    """A growth rate was requested from a zero starting value."""


class UndefinedGiniError(StatisticError):
    """A Gini coefficient was requested for an all-zero series."""


class EmptySeriesError(StatisticError):
    """A summary was requested for an empty series."""


# Store


class StoreError(CensusError):
    """The embedded store rejected an operation."""


class SchemaMismatchError(StoreError):
    """The store file was written by an incompatible schema version."""


class CatalogError(StoreError, KeyError):
    """A query named a view that is not in the catalog."""


class ForeignKeyError(StoreError):
    """A row references a parent that does not exist."""
