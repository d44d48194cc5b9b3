"""Trove classifier labels and their category tallies."""

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from pypi_census.core.stats import FrequencyTable
from pypi_census.errors import MalformedLabelError
from pypi_census.log import get_logger

log = get_logger("classifiers")

SEPARATOR = " :: "


@dataclass(frozen=True)
class ClassifierLabel:
    raw: str
    segments: tuple[str, ...]

    @property
    def category(self) -> str:
        return self.segments[0]

    @property
    def depth(self) -> int:
        return len(self.segments)

    @property
    def normalized(self) -> str:
        return SEPARATOR.join(self.segments)

    def startswith(self, prefix: Sequence[str]) -> bool:
        return tuple(self.segments[: len(prefix)]) == tuple(prefix)


def parse_classifier(raw: str) -> ClassifierLabel:
    """Split a label on ``::`` with surrounding whitespace trimmed.

    Raises:
        MalformedLabelError: If the label or any segment is empty.
    """
    if not raw or not raw.strip():
        raise MalformedLabelError("empty classifier label")
    segments = tuple(" ".join(part.split()) for part in raw.split("::"))
    if any(not segment for segment in segments):
        raise MalformedLabelError(f"empty segment in classifier {raw!r}")
    return ClassifierLabel(raw=raw, segments=segments)


def parse_labels(raw_labels: Iterable[str]) -> list[ClassifierLabel]:
    """Parse many labels, dropping malformed ones."""
    labels = []
    for raw in raw_labels:
        try:
            labels.append(parse_classifier(raw))
        except MalformedLabelError as e:
            log.debug("Skipping classifier: %s", e)
    return labels


def tally(
    labels: Iterable[ClassifierLabel],
    prefix: Sequence[str],
    group_depth: int,
    leaf: bool = False,
) -> FrequencyTable:
    """Count labels under ``prefix`` grouped by their next segments.

    By default the key is the segments after the prefix up to
    ``group_depth``, and shallower labels are left out. With ``leaf`` the
    key is the whole remainder, so "Libraries" and "Libraries :: Python
    Modules" are separate rows.
    """
    prefix = tuple(prefix)
    if group_depth <= len(prefix):
        raise ValueError("group_depth must exceed the prefix length")

    counts: Counter[str] = Counter()
    for label in labels:
        if label.depth < group_depth or not label.startswith(prefix):
            continue
        end = label.depth if leaf else group_depth
        counts[SEPARATOR.join(label.segments[len(prefix) : end])] += 1
    return FrequencyTable.from_counts(counts)


@dataclass(frozen=True)
class ClassifierReport:
    name: str
    title: str
    prefix: tuple[str, ...]
    group_depth: int
    leaf: bool = False
    top_n: Optional[int] = None

    def compute(self, labels: Iterable[ClassifierLabel]) -> FrequencyTable:
        table = tally(labels, self.prefix, self.group_depth, leaf=self.leaf)
        return table.top(self.top_n) if self.top_n else table


CLASSIFIER_REPORTS: tuple[ClassifierReport, ...] = (
    ClassifierReport("development_status", "Development status", ("Development Status",), 2),
    ClassifierReport("intended_audience", "Intended audience", ("Intended Audience",), 2),
    ClassifierReport("operating_system", "Operating system", ("Operating System",), 2),
    ClassifierReport("framework", "Framework", ("Framework",), 2, top_n=20),
    ClassifierReport("topic", "Topic", ("Topic",), 2),
    ClassifierReport(
        "topic_software_development",
        "Software Development subtopic",
        ("Topic", "Software Development"),
        3,
        leaf=True,
        top_n=20,
    ),
    ClassifierReport(
        "topic_scientific_engineering",
        "Scientific/Engineering subtopic",
        ("Topic", "Scientific/Engineering"),
        3,
        leaf=True,
        top_n=20,
    ),
)
