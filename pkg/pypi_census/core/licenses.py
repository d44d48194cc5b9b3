"""License normalization and the per-package resolution cascade.

A package's license is taken from the first tier that yields one:

1. the free-text license metadata field,
2. a license file in the package's code repository,
3. its ``License ::`` trove classifiers,

and is Unknown otherwise. Matching is driven by a rule table
(``data/license_rules.tsv``) rather than code.
"""

import csv
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Iterable, Optional

from pypi_census.config import DEFAULT_RULES_PATH
from pypi_census.errors import CensusError, FetchError
from pypi_census.log import get_logger

if TYPE_CHECKING:
    from pypi_census.core.registry import PackageRecord, RegistryClient

log = get_logger("licenses")

NOT_APPLICABLE = "n/a"
UNKNOWN_VERSION = "Unknown"
DEFAULT_LICENSE_FILES = ("LICENSE", "LICENSE.txt", "LICENSE.md", "LICENSE.rst")
LICENSE_PREFIX = "License ::"

# Versions each copyleft family may carry.
GPL_FAMILY_VERSIONS = {
    "GPL": {"2", "3", UNKNOWN_VERSION},
    "LGPL": {"2", "2.1", "3", UNKNOWN_VERSION},
    "AGPL": {"3", UNKNOWN_VERSION},
}


class LicenseFamily(Enum):
    MIT = "MIT"
    BSD = "BSD"
    APACHE = "Apache"
    GPL = "GPL"
    LGPL = "LGPL"
    AGPL = "AGPL"
    MPL = "MPL"
    ISC = "ISC"
    PSFL = "PSFL"
    ZOPE = "Zope"
    CC = "CC"
    CECILL = "CeCILL"
    ZLIB = "zlib"
    PUBLIC_DOMAIN = "Public Domain"
    PROPRIETARY = "Proprietary"
    UNKNOWN = "Unknown"


class LicenseSource(Enum):
    METADATA_FIELD = "metadata_field"
    LICENSE_FILE = "license_file"
    CLASSIFIER = "classifier"
    UNKNOWN = "unknown"


class RuleKind(Enum):
    NAME = "name"
    URL = "url"
    PHRASE = "phrase"
    CLASSIFIER = "classifier"


@dataclass(frozen=True)
class LicenseAssignment:
    """A normalized (family, name, version) triple and the tier that produced it.

    ``ambiguous`` marks conflicting classifier labels: family Unknown with
    source classifier, the one case where Unknown carries a source.
    """

    family: LicenseFamily
    name: str
    version: str
    source: LicenseSource = LicenseSource.METADATA_FIELD
    ambiguous: bool = False

    def __post_init__(self):
        unknown_family = self.family is LicenseFamily.UNKNOWN
        if self.ambiguous:
            if not unknown_family or self.source is not LicenseSource.CLASSIFIER:
                raise ValueError("ambiguous assignments are Unknown with source classifier")
        elif unknown_family != (self.source is LicenseSource.UNKNOWN):
            raise ValueError("family Unknown requires source unknown and vice versa")
        allowed = GPL_FAMILY_VERSIONS.get(self.family.value)
        if allowed is not None and self.version not in allowed:
            raise ValueError(f"{self.family.value} cannot carry version {self.version!r}")

    @classmethod
    def unknown(cls) -> "LicenseAssignment":
        return cls(LicenseFamily.UNKNOWN, "Unknown", UNKNOWN_VERSION, LicenseSource.UNKNOWN)

    @classmethod
    def ambiguous_marker(cls) -> "LicenseAssignment":
        return cls(
            LicenseFamily.UNKNOWN,
            "Unknown",
            UNKNOWN_VERSION,
            LicenseSource.CLASSIFIER,
            ambiguous=True,
        )

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.family.value, self.name, self.version)

    @property
    def canonical(self) -> str:
        """Display string; normalizing it yields this assignment again."""
        if self.version in (NOT_APPLICABLE, UNKNOWN_VERSION):
            return self.name
        return f"{self.name} {self.version}"

    def with_source(self, source: LicenseSource) -> "LicenseAssignment":
        return replace(self, source=source)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "name": self.name,
            "version": self.version,
            "source": self.source.value,
            "ambiguous": self.ambiguous,
        }


_STOPWORDS = {"license", "licence", "licenses", "licences", "the", "version", "v"}


def fold(raw: str) -> str:
    """Case- and punctuation-folded form used for name lookups.

    "BSD 3 Clause License", "bsd-3-clause" and "BSD 3-Clause" all fold to
    "bsd 3 clause"; "GPLv3" folds to "gpl 3".
    """
    text = raw.lower()
    text = re.sub(r"v(?=\d)", " ", text)
    text = re.sub(r"[^\w\s]+|_", " ", text)
    return " ".join(token for token in text.split() if token not in _STOPWORDS)


def normalize_classifier_label(label: str) -> str:
    return " :: ".join(part.strip() for part in label.split("::"))


_URL = re.compile(r"(?:https?://|www\.)[^\s<>\"')\]]+", re.IGNORECASE)


def _strip_url(url: str) -> str:
    url = re.sub(r"^https?://", "", url.lower())
    return url.removeprefix("www.")


def _phrase_pattern(phrase: str) -> re.Pattern:
    return re.compile(r"\s+".join(re.escape(word) for word in phrase.split()), re.IGNORECASE)


@dataclass(frozen=True)
class LicenseRule:
    kind: RuleKind
    pattern: str
    assignment: LicenseAssignment


class LicenseRuleSet:
    """Immutable lookup tables built from rule rows.

    Lookup order for free text is name, then URL, then phrase. Names and
    URLs take the first rule in file order; phrases go by position in the
    text (see ``match_phrase``).
    """

    def __init__(self, rules: Iterable[LicenseRule], version: str = "unversioned"):
        self.version = version
        self.name_map: dict[str, LicenseAssignment] = {}
        self.url_map: dict[str, LicenseAssignment] = {}
        self.phrase_map: dict[str, LicenseAssignment] = {}
        self.classifier_map: dict[str, LicenseAssignment] = {}
        self._phrases: list[tuple[re.Pattern, LicenseAssignment]] = []

        rules = list(rules)
        for rule in rules:
            if rule.kind is RuleKind.NAME:
                self.name_map.setdefault(fold(rule.pattern), rule.assignment)
            elif rule.kind is RuleKind.URL:
                self.url_map.setdefault(rule.pattern.lower(), rule.assignment)
            elif rule.kind is RuleKind.PHRASE:
                if rule.pattern not in self.phrase_map:
                    self.phrase_map[rule.pattern] = rule.assignment
                    self._phrases.append((_phrase_pattern(rule.pattern), rule.assignment))
            else:
                label = normalize_classifier_label(rule.pattern)
                self.classifier_map.setdefault(label, rule.assignment)

        # Every canonical string resolves back to its own assignment.
        for rule in rules:
            self.name_map.setdefault(fold(rule.assignment.canonical), rule.assignment)

    def __len__(self) -> int:
        return len(self.name_map) + len(self.url_map) + len(self.phrase_map) + len(
            self.classifier_map
        )

    def assignments(self) -> list[LicenseAssignment]:
        """Distinct assignments any rule can produce, in first-seen order."""
        seen: dict[tuple, LicenseAssignment] = {}
        for table in (self.name_map, self.url_map, self.phrase_map, self.classifier_map):
            for assignment in table.values():
                seen.setdefault(assignment.key, assignment)
        return list(seen.values())

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "LicenseRuleSet":
        """Read a tab-separated rule file.

        Raises:
            CensusError: On unreadable files or malformed rows.
        """
        path = Path(path or DEFAULT_RULES_PATH)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise CensusError(f"Cannot read license rules {path}: {e}") from e

        version = "unversioned"
        rows = []
        for number, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                match = re.match(r"#\s*version:\s*(\S+)", stripped)
                if match:
                    version = match.group(1)
                continue
            rows.append((number, line))

        rules = []
        for (number, _), fields in zip(
            rows, csv.reader([line for _, line in rows], delimiter="\t", quoting=csv.QUOTE_NONE)
        ):
            try:
                rules.append(_rule_from_fields(fields))
            except ValueError as e:
                raise CensusError(f"{path}:{number}: {e}") from e
        log.debug("Loaded %d license rules (version %s) from %s", len(rules), version, path)
        return cls(rules, version=version)

    # Lookups

    def match_name(self, raw: str) -> Optional[LicenseAssignment]:
        return self.name_map.get(fold(raw))

    def match_url(self, raw: str) -> Optional[LicenseAssignment]:
        for url in _URL.findall(raw):
            bare = _strip_url(url)
            for pattern, assignment in self.url_map.items():
                if pattern in bare:
                    return assignment
        return None

    def match_phrase(self, text: str) -> Optional[LicenseAssignment]:
        """The license named earliest in the text picks the family.

        Within that family the first rule in file order that matches
        anywhere picks name and version, so a BSD text with a
        "Neither the name of" clause is 3-Clause even though its opening
        sentence matches the 2-Clause phrase first.
        """
        hits = []
        for order, (pattern, assignment) in enumerate(self._phrases):
            match = pattern.search(text)
            if match:
                hits.append((match.start(), order, assignment))
        if not hits:
            return None
        family = min(hits, key=lambda hit: hit[:2])[2].family
        return min(
            ((order, assignment) for _, order, assignment in hits if assignment.family is family),
            key=lambda hit: hit[0],
        )[1]

    def match_classifier(self, label: str) -> Optional[LicenseAssignment]:
        return self.classifier_map.get(normalize_classifier_label(label))


def _rule_from_fields(fields: list[str]) -> LicenseRule:
    if len(fields) != 5:
        raise ValueError(f"expected 5 tab-separated fields, got {len(fields)}")
    kind, pattern, family, name, version = (f.strip() for f in fields)
    if not pattern:
        raise ValueError("empty pattern")
    try:
        rule_kind = RuleKind(kind)
        license_family = LicenseFamily(family)
    except ValueError as e:
        raise ValueError(f"unknown kind or family: {e}") from e
    if license_family is LicenseFamily.UNKNOWN:
        raise ValueError("rules cannot produce the Unknown family")
    return LicenseRule(rule_kind, pattern, LicenseAssignment(license_family, name, version))


_default_rules: Optional[LicenseRuleSet] = None


def default_rules() -> LicenseRuleSet:
    """The shipped rule set, loaded once."""
    global _default_rules
    if _default_rules is None:
        _default_rules = LicenseRuleSet.load()
    return _default_rules


def normalize_license_string(
    raw: Optional[str],
    rules: LicenseRuleSet,
    source: LicenseSource = LicenseSource.METADATA_FIELD,
) -> Optional[LicenseAssignment]:
    """Map a free-text license value to an assignment, or None."""
    if raw is None or not raw.strip():
        return None
    assignment = rules.match_name(raw) or rules.match_url(raw) or rules.match_phrase(raw)
    return assignment.with_source(source) if assignment else None


def resolve_from_license_file(text: Optional[str], rules: LicenseRuleSet) -> Optional[LicenseAssignment]:
    """Scan a license file's text for a known phrase."""
    if not text:
        return None
    assignment = rules.match_phrase(text)
    return assignment.with_source(LicenseSource.LICENSE_FILE) if assignment else None


def resolve_from_classifiers(labels: Iterable[str], rules: LicenseRuleSet) -> Optional[LicenseAssignment]:
    """Map ``License ::`` labels; conflicting labels give the ambiguous marker.

    Labels without a table row are ignored. A versionless label that agrees
    with a versioned one on family and name does not count as a conflict.
    """
    found: dict[tuple, LicenseAssignment] = {}
    for label in labels:
        if not normalize_classifier_label(label).startswith(LICENSE_PREFIX):
            continue
        assignment = rules.match_classifier(label)
        if assignment is not None:
            found.setdefault(assignment.key, assignment)

    candidates = list(found.values())
    versioned = {(a.family, a.name) for a in candidates if a.version != UNKNOWN_VERSION}
    candidates = [
        a
        for a in candidates
        if a.version != UNKNOWN_VERSION or (a.family, a.name) not in versioned
    ]
    if not candidates:
        return None
    if len(candidates) > 1:
        return LicenseAssignment.ambiguous_marker()
    return candidates[0].with_source(LicenseSource.CLASSIFIER)


# Repository license files

_GITHUB = re.compile(
    r"^(?:https?://)?(?:www\.)?github\.com/([\w.-]+)/([\w.-]+?)(?:\.git)?(?:[/#?].*)?$",
    re.IGNORECASE,
)
_PATHLIKE = re.compile(r"[\w.\-/]+")


def parse_repository_url(home_page: Optional[str]) -> Optional[tuple[str, str]]:
    """Return ``(owner, repo)`` for a GitHub repository URL, else None."""
    if not home_page:
        return None
    match = _GITHUB.match(home_page.strip())
    if not match:
        return None
    return match.group(1), match.group(2)


def looks_like_path(license_field: Optional[str]) -> bool:
    """Whether a license metadata value names a file in the repository."""
    if not license_field:
        return False
    value = license_field.strip()
    if not value or len(value) > 200 or not _PATHLIKE.fullmatch(value):
        return False
    if "/" in value:
        return True
    upper = value.upper()
    return upper.startswith(("LICENSE", "LICENCE", "COPYING")) or upper.endswith(
        (".TXT", ".MD", ".RST")
    )


def fetch_license_file(
    client: "RegistryClient", home_page: Optional[str], license_field: Optional[str]
) -> Optional[str]:
    """Fetch a license file from the package's repository.

    A path-like license field is fetched as given; otherwise the default
    file names are tried in order. Fetch failures return None.
    """
    repository = parse_repository_url(home_page)
    if repository is None:
        return None
    owner, repo = repository

    if looks_like_path(license_field):
        candidates: tuple[str, ...] = (license_field.strip().lstrip("/"),)
    else:
        candidates = DEFAULT_LICENSE_FILES

    for path in candidates:
        try:
            data = client.read_repo_file(owner, repo, path)
        except FetchError as e:
            log.warning("License file %s/%s/%s unavailable: %s", owner, repo, path, e)
            return None
        if data is not None:
            return data.decode("utf-8", errors="replace")
    return None


LicenseFileFetcher = Callable[[Optional[str], Optional[str]], Optional[str]]


def resolve_package_license(
    pkg: "PackageRecord",
    rules: LicenseRuleSet,
    fetch_file: Optional[LicenseFileFetcher] = None,
) -> LicenseAssignment:
    """Run the cascade for one package; the first tier with a result wins."""
    assignment = normalize_license_string(pkg.license_field, rules)
    if assignment is not None:
        return assignment

    if fetch_file is not None:
        text = fetch_file(pkg.home_page, pkg.license_field)
        assignment = resolve_from_license_file(text, rules)
        if assignment is not None:
            return assignment

    assignment = resolve_from_classifiers(pkg.classifiers, rules)
    if assignment is not None:
        return assignment
    return LicenseAssignment.unknown()
