"""Tests for sdist archive reading."""

from pathlib import Path

import pytest

from pypi_census.core.archive import (
    ArchiveFormat,
    SdistArchive,
    decode_source,
    detect_format,
    list_source_entries,
    read_entry_text,
)
from pypi_census.errors import ArchiveError, EntryNotFoundError
from tests.fixture_registry import build_archive

SOURCES = {
    "pkg/__init__.py": "import os\n",
    "pkg/data.txt": "not python\n",
    "setup.py": "from setuptools import setup\n",
}

FILENAMES = [
    "demo-1.0.tar.gz",
    "demo-1.0.tgz",
    "demo-1.0.tar.bz2",
    "demo-1.0.tbz",
    "demo-1.0.tar",
    "demo-1.0.zip",
    "demo-1.0.egg",
]


def write_archive(tmp_path: Path, filename: str, sources: dict[str, str]) -> Path:
    path = tmp_path / filename
    path.write_bytes(build_archive(filename, sources))
    return path


class TestDetectFormat:
    """Tests for extension-based format detection."""

    @pytest.mark.parametrize(
        "filename, expected",
        [
            ("x-1.tar.gz", ArchiveFormat.TAR_GZ),
            ("x-1.tgz", ArchiveFormat.TGZ),
            ("x-1.tar.bz2", ArchiveFormat.TAR_BZ2),
            ("x-1.tbz", ArchiveFormat.TBZ),
            ("x-1.tar", ArchiveFormat.TAR),
            ("x-1.zip", ArchiveFormat.ZIP),
            ("x-1.egg", ArchiveFormat.EGG),
        ],
    )
    def test_known_extensions(self, filename: str, expected: ArchiveFormat) -> None:
        """Test each supported extension maps to its format."""
        assert detect_format(filename) is expected

    @pytest.mark.parametrize("filename", ["x-1.rar", "x-1.tar.xz", "x-1.whl", "x-1.TAR.GZ"])
    def test_unsupported(self, filename: str) -> None:
        """Test unknown or differently-cased extensions are unsupported."""
        assert detect_format(filename) is None

    def test_unsupported_archive_raises(self, tmp_path: Path) -> None:
        """Test opening an unsupported archive raises ArchiveError."""
        with pytest.raises(ArchiveError):
            SdistArchive(tmp_path / "x-1.rar")


class TestListing:
    """Tests for listing entries across formats."""

    @pytest.mark.parametrize("filename", FILENAMES)
    def test_lists_regular_files(self, tmp_path: Path, filename: str) -> None:
        """Test directories are skipped and every regular file is listed."""
        path = write_archive(tmp_path, filename, SOURCES)

        entries = list_source_entries(path)

        assert sorted(e.path for e in entries) == [
            "demo-1.0/pkg/__init__.py",
            "demo-1.0/pkg/data.txt",
            "demo-1.0/setup.py",
        ]
        assert {e.path: e.is_python_source for e in entries}["demo-1.0/pkg/data.txt"] is False

    @pytest.mark.parametrize("filename", FILENAMES)
    def test_iter_python_sources(self, tmp_path: Path, filename: str) -> None:
        """Test only .py entries are yielded with their decoded text."""
        path = write_archive(tmp_path, filename, SOURCES)

        with SdistArchive(path) as archive:
            sources = {entry.path: text for entry, text in archive.iter_python_sources()}

        assert sources == {
            "demo-1.0/pkg/__init__.py": "import os\n",
            "demo-1.0/setup.py": "from setuptools import setup\n",
        }


class TestReadText:
    """Tests for reading one entry."""

    def test_reads_entry(self, tmp_path: Path) -> None:
        """Test an entry is read by path."""
        path = write_archive(tmp_path, "demo-1.0.tar.gz", SOURCES)
        assert read_entry_text(path, "demo-1.0/setup.py") == "from setuptools import setup\n"

    @pytest.mark.parametrize("filename", ["demo-1.0.tar.gz", "demo-1.0.zip"])
    def test_missing_entry(self, tmp_path: Path, filename: str) -> None:
        """Test a missing entry raises EntryNotFoundError."""
        path = write_archive(tmp_path, filename, SOURCES)
        with pytest.raises(EntryNotFoundError):
            read_entry_text(path, "demo-1.0/nope.py")

    def test_entry_not_found_is_lookup_error(self, tmp_path: Path) -> None:
        """Test the missing-entry error is also a LookupError."""
        path = write_archive(tmp_path, "demo-1.0.zip", SOURCES)
        with pytest.raises(LookupError):
            read_entry_text(path, "missing.py")


class TestLimits:
    """Tests for the decompression cap and the per-entry limit."""

    @pytest.mark.parametrize("filename", ["demo-1.0.tar.gz", "demo-1.0.zip"])
    def test_cap_exceeded(self, tmp_path: Path, filename: str) -> None:
        """Test exceeding the decompression cap raises ArchiveError."""
        path = write_archive(tmp_path, filename, {"big.py": "x = 1\n" * 100})

        with pytest.raises(ArchiveError, match="cap"):
            list(SdistArchive(path, cap_bytes=64).iter_python_sources())

    def test_oversized_entry_skipped(self, tmp_path: Path) -> None:
        """Test entries over the per-entry limit are skipped, not fatal."""
        path = write_archive(
            tmp_path, "demo-1.0.tar.gz", {"small.py": "import a\n", "big.py": "import b\n" * 50}
        )

        archive = SdistArchive(path, max_entry_bytes=100)
        paths = [entry.path for entry, _ in archive.iter_python_sources()]

        assert paths == ["demo-1.0/small.py"]

    def test_corrupt_archive(self, tmp_path: Path) -> None:
        """Test garbage bytes raise ArchiveError naming the release."""
        path = tmp_path / "demo-1.0.tar.gz"
        path.write_bytes(b"\x1f\x8b\x08\x00 not a real stream")

        with pytest.raises(ArchiveError) as excinfo:
            list(SdistArchive(path, package="demo", release="1.0").iter_python_sources())

        assert excinfo.value.package == "demo"
        assert excinfo.value.release == "1.0"

    def test_corrupt_zip(self, tmp_path: Path) -> None:
        """Test a truncated zip raises ArchiveError when listed."""
        path = tmp_path / "demo-1.0.zip"
        path.write_bytes(b"PK\x03\x04 truncated")

        with pytest.raises(ArchiveError):
            list_source_entries(path)


class TestDecodeSource:
    """Tests for never-failing source decoding."""

    def test_utf8(self) -> None:
        """Test UTF-8 is the default."""
        assert decode_source("s = 'héllo'\n".encode("utf-8")) == "s = 'héllo'\n"

    def test_coding_declaration(self) -> None:
        """Test a coding declaration selects the codec."""
        data = b"# -*- coding: latin-1 -*-\ns = '\xe9'\n"
        assert decode_source(data).endswith("s = 'é'\n")

    def test_invalid_bytes_replaced(self) -> None:
        """Test invalid sequences become replacement characters."""
        assert "�" in decode_source(b"s = '\xff\xfe'\n")

    def test_unknown_codec_falls_back(self) -> None:
        """Test an unknown codec name falls back to UTF-8."""
        text = decode_source(b"# coding: no-such-codec\nimport os\n")
        assert "import os" in text
