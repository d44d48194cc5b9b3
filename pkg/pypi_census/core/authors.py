"""Author string heuristics: multiple authorship and organizations."""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import yaml
from pydantic import BaseModel, PrivateAttr, ValidationError

from pypi_census.config import DEFAULT_AUTHOR_TERMS_PATH
from pypi_census.errors import CensusError
from pypi_census.log import get_logger

log = get_logger("authors")

_MULTIPLE = re.compile(r",|\sand\s|\bet\s+al\.", re.IGNORECASE)


class AuthorTerms(BaseModel):
    """Abbreviation and token lists used to spot organizations."""

    version: str = "unversioned"
    abbreviations: list[str]
    tokens: list[str]

    _patterns: Optional[tuple[re.Pattern, re.Pattern]] = PrivateAttr(default=None)

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "AuthorTerms":
        path = Path(path or DEFAULT_AUTHOR_TERMS_PATH)
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as e:
            raise CensusError(f"Cannot read author terms {path}: {e}") from e
        try:
            terms = cls(**data)
        except (ValidationError, TypeError) as e:
            raise CensusError(f"Invalid author terms in {path}: {e}") from e
        log.debug(
            "Loaded %d abbreviations and %d tokens from %s",
            len(terms.abbreviations),
            len(terms.tokens),
            path,
        )
        return terms

    def abbreviation_pattern(self) -> re.Pattern:
        alternatives = "|".join(re.escape(a.rstrip(".")) for a in self.abbreviations)
        return re.compile(rf"(?<![\w-])(?:{alternatives})\.?(?=$|[\s.,;)\]])")

    def token_pattern(self) -> re.Pattern:
        alternatives = "|".join(re.escape(t) for t in self.tokens)
        return re.compile(rf"\b(?:{alternatives})\b", re.IGNORECASE)

    def matches(self, raw: str) -> bool:
        """Whether any abbreviation or token occurs in ``raw``."""
        if self._patterns is None:
            self._patterns = (self.abbreviation_pattern(), self.token_pattern())
        abbreviations, tokens = self._patterns
        return bool(abbreviations.search(raw) or tokens.search(raw))


_default_terms: Optional[AuthorTerms] = None


def default_terms() -> AuthorTerms:
    global _default_terms
    if _default_terms is None:
        _default_terms = AuthorTerms.load()
    return _default_terms


def normalize_author_key(raw: str) -> str:
    """Trim, collapse whitespace and case-fold."""
    return " ".join(raw.split()).casefold()


def is_multiple_authors(raw: str) -> bool:
    """A comma, a standalone "and" or "et al." marks several authors.

    "Doe, Jane" is a known false positive of the comma rule.
    """
    return bool(_MULTIPLE.search(raw))


def is_organization(raw: str, terms: Optional[AuthorTerms] = None) -> bool:
    """Abbreviations match case-sensitively, tokens case-insensitively."""
    return (terms or default_terms()).matches(raw)


@dataclass(frozen=True)
class AuthorRecord:
    raw: str
    is_multiple: bool
    is_organization: bool
    key: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "key", normalize_author_key(self.raw))


def classify_author(raw: str, terms: Optional[AuthorTerms] = None) -> AuthorRecord:
    return AuthorRecord(
        raw=raw,
        is_multiple=is_multiple_authors(raw),
        is_organization=is_organization(raw, terms),
    )


@dataclass(frozen=True)
class AuthorTypeShare:
    """Share of distinct author strings and of packages with one author type."""

    label: str
    author_strings: float
    packages: float


def author_type_shares(
    package_authors: Iterable[Optional[str]], terms: Optional[AuthorTerms] = None
) -> list[AuthorTypeShare]:
    """Organization and multiple-author shares on both bases.

    ``package_authors`` holds one author string per package; packages
    without an author are left out of both denominators.
    """
    records = [classify_author(raw, terms) for raw in package_authors if raw and raw.strip()]
    distinct: dict[str, AuthorRecord] = {}
    for record in sorted(records, key=lambda r: r.raw):
        distinct.setdefault(record.key, record)

    def share(items: list[AuthorRecord], flag: str) -> float:
        if not items:
            return 0.0
        return sum(1 for r in items if getattr(r, flag)) / len(items)

    unique = list(distinct.values())
    return [
        AuthorTypeShare("Organization", share(unique, "is_organization"), share(records, "is_organization")),
        AuthorTypeShare("Multiple Authors", share(unique, "is_multiple"), share(records, "is_multiple")),
    ]
