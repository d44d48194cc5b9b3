"""Tests for author string heuristics."""

from pathlib import Path

import pytest

from pypi_census.core.authors import (
    AuthorTerms,
    author_type_shares,
    classify_author,
    default_terms,
    is_multiple_authors,
    is_organization,
    normalize_author_key,
)
from pypi_census.errors import CensusError


class TestMultipleAuthors:
    """Tests for the multiple-author rule."""

    @pytest.mark.parametrize(
        "raw",
        ["Bob Smith and Carol White", "Smith, Jones", "A. Smith et al.", "X AND Y"],
    )
    def test_multiple(self, raw: str) -> None:
        """Test commas, a standalone "and" and "et al." mark several authors."""
        assert is_multiple_authors(raw)

    @pytest.mark.parametrize("raw", ["Jane Doe", "Anderson Smith", "Randall"])
    def test_single(self, raw: str) -> None:
        """Test "and" inside a word does not count."""
        assert not is_multiple_authors(raw)

    def test_comma_false_positive(self) -> None:
        """Test "Last, First" reads as multiple authors."""
        assert is_multiple_authors("Doe, Jane")


class TestOrganization:
    """Tests for organization detection."""

    @pytest.mark.parametrize(
        "raw",
        ["Acme Labs Inc.", "Acme Inc", "Widgets GmbH", "The Pallets Team", "PyCQA developers"],
    )
    def test_organizations(self, raw: str) -> None:
        """Test abbreviations and organizational tokens."""
        assert is_organization(raw)

    @pytest.mark.parametrize("raw", ["Jane Doe", "Acme inc.", "Incognito Smith", "Coco Chanel"])
    def test_people(self, raw: str) -> None:
        """Test abbreviations need exact case and a word boundary."""
        assert not is_organization(raw)

    def test_custom_terms(self) -> None:
        """Test a custom term list replaces the shipped one."""
        terms = AuthorTerms(abbreviations=["KK"], tokens=["Guild"])

        assert is_organization("Tanaka KK", terms)
        assert is_organization("the makers guild", terms)
        assert not is_organization("Acme Inc.", terms)


class TestAuthorTerms:
    """Tests for loading term lists."""

    def test_default_version(self) -> None:
        """Test the shipped term list declares its version."""
        assert default_terms().version == "2026.1"

    def test_load(self, tmp_path: Path) -> None:
        """Test terms load from YAML."""
        path = tmp_path / "terms.yaml"
        path.write_text("version: t1\nabbreviations: [Inc]\ntokens: [Team]\n")

        terms = AuthorTerms.load(path)

        assert terms.version == "t1"
        assert terms.tokens == ["Team"]

    def test_invalid(self, tmp_path: Path) -> None:
        """Test a file missing a list raises CensusError."""
        path = tmp_path / "terms.yaml"
        path.write_text("abbreviations: [Inc]\n")

        with pytest.raises(CensusError):
            AuthorTerms.load(path)

    def test_missing(self, tmp_path: Path) -> None:
        """Test a missing file raises CensusError."""
        with pytest.raises(CensusError):
            AuthorTerms.load(tmp_path / "nope.yaml")


class TestShares:
    """Tests for author type shares."""

    def test_key_normalization(self) -> None:
        """Test whitespace and case do not split an author."""
        assert normalize_author_key("  Jane   DOE ") == "jane doe"
        assert classify_author("jane  doe").key == classify_author("Jane Doe").key

    def test_two_bases(self) -> None:
        """Test shares over distinct strings differ from shares over packages."""
        authors = [
            "Jane Doe",
            "Jane Doe",
            "jane  doe",
            "Acme Labs Inc.",
            "Acme Labs Inc.",
            "Bob Smith and Carol White",
            "Bob Smith and Carol White",
            None,
        ]

        organization, multiple = author_type_shares(authors)

        assert organization.label == "Organization"
        assert organization.author_strings == pytest.approx(1 / 3)
        assert organization.packages == pytest.approx(2 / 7)
        assert multiple.label == "Multiple Authors"
        assert multiple.author_strings == pytest.approx(1 / 3)
        assert multiple.packages == pytest.approx(2 / 7)

    def test_empty(self) -> None:
        """Test no authors gives zero shares."""
        assert [s.packages for s in author_type_shares([None, " "])] == [0.0, 0.0]
