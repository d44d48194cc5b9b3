"""Source distribution archives: format detection, listing and text streaming.

Archives are never extracted to disk. Tar variants are read as a single
forward stream; zip containers (including ``.egg``) through their central
directory. Every pass counts decompressed bytes against a cap so a hostile
archive cannot exhaust memory.
"""

import io
import stat
import tarfile
import tokenize
import zipfile
import zlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Iterator, Optional

from pypi_census.config import GIB, MIB
from pypi_census.errors import ArchiveError, EntryNotFoundError
from pypi_census.log import get_logger

log = get_logger("archive")

DEFAULT_CAP_BYTES = 4 * GIB
DEFAULT_MAX_ENTRY_BYTES = 16 * MIB
_CHUNK = 1 << 16

_ARCHIVE_ERRORS = (
    tarfile.TarError,
    zipfile.BadZipFile,
    zlib.error,
    EOFError,
    OSError,
    NotImplementedError,
    RuntimeError,
)


class ArchiveFormat(Enum):
    """Archive kinds attempted by the scanner."""

    ZIP = "zip"
    EGG = "egg"
    TAR = "tar"
    TAR_GZ = "tar_gz"
    TGZ = "tgz"
    TAR_BZ2 = "tar_bz2"
    TBZ = "tbz"

    @property
    def is_zip(self) -> bool:
        return self in (ArchiveFormat.ZIP, ArchiveFormat.EGG)

    @property
    def tar_stream_mode(self) -> str:
        return {
            ArchiveFormat.TAR: "r|",
            ArchiveFormat.TAR_GZ: "r|gz",
            ArchiveFormat.TGZ: "r|gz",
            ArchiveFormat.TAR_BZ2: "r|bz2",
            ArchiveFormat.TBZ: "r|bz2",
        }[self]


# Longest suffix first so ".tar.gz" wins over ".gz"-style endings.
_EXTENSIONS: list[tuple[str, ArchiveFormat]] = [
    (".tar.bz2", ArchiveFormat.TAR_BZ2),
    (".tar.gz", ArchiveFormat.TAR_GZ),
    (".tgz", ArchiveFormat.TGZ),
    (".tbz", ArchiveFormat.TBZ),
    (".tar", ArchiveFormat.TAR),
    (".zip", ArchiveFormat.ZIP),
    (".egg", ArchiveFormat.EGG),
]

EXTENSIONS = tuple(ext for ext, _ in _EXTENSIONS)


def detect_format(filename: str) -> Optional[ArchiveFormat]:
    """Map a file name to its archive format; None means unsupported.

    Matching is case-sensitive: registry file names are machine-generated.
    """
    for extension, fmt in _EXTENSIONS:
        if filename.endswith(extension):
            return fmt
    return None


@dataclass(frozen=True)
class SourceEntry:
    """A regular file inside an archive."""

    path: str
    size_bytes: int
    is_python_source: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "is_python_source", self.path.endswith(".py"))


def decode_source(data: bytes) -> str:
    """Decode source bytes without ever failing.

    A PEP 263 codec declaration in the first two lines is honored; otherwise
    UTF-8 is used. Invalid sequences become U+FFFD.
    """
    try:
        encoding, _ = tokenize.detect_encoding(io.BytesIO(data).readline)
    except SyntaxError:
        encoding = "utf-8"
    try:
        return data.decode(encoding, errors="replace")
    except LookupError:
        return data.decode("utf-8", errors="replace")


def _is_zip_symlink(info: zipfile.ZipInfo) -> bool:
    return stat.S_ISLNK(info.external_attr >> 16)


class SdistArchive:
    """Reader for one sdist archive.

    Example:
        with SdistArchive(path) as archive:
            for entry, text in archive.iter_python_sources():
                ...
    """

    def __init__(
        self,
        path: Path,
        fmt: Optional[ArchiveFormat] = None,
        cap_bytes: int = DEFAULT_CAP_BYTES,
        max_entry_bytes: int = DEFAULT_MAX_ENTRY_BYTES,
        package: Optional[str] = None,
        release: Optional[str] = None,
    ):
        self.path = Path(path)
        self.format = fmt or detect_format(self.path.name)
        if self.format is None:
            raise ArchiveError(f"unsupported archive {self.path.name}", package, release)
        self.cap_bytes = cap_bytes
        self.max_entry_bytes = max_entry_bytes
        self.package = package
        self.release = release
        self._consumed = 0

    def __enter__(self) -> "SdistArchive":
        return self

    def __exit__(self, *exc) -> None:
        pass

    def _error(self, message: str) -> ArchiveError:
        return ArchiveError(f"{self.path.name}: {message}", self.package, self.release)

    def _account(self, n: int) -> None:
        self._consumed += n
        if self._consumed > self.cap_bytes:
            raise self._error(f"decompressed size exceeds cap of {self.cap_bytes} bytes")

    def _read(self, fh: BinaryIO) -> bytes:
        buffer = bytearray()
        while chunk := fh.read(_CHUNK):
            self._account(len(chunk))
            buffer.extend(chunk)
        return bytes(buffer)

    # Zip containers

    def _zip_members(self, zf: zipfile.ZipFile) -> Iterator[zipfile.ZipInfo]:
        for info in zf.infolist():
            if info.is_dir() or _is_zip_symlink(info):
                continue
            yield info

    # Tar streams

    def _tar_members(self, tf: tarfile.TarFile) -> Iterator[tarfile.TarInfo]:
        for member in tf:
            if not member.isfile():
                continue
            # A stream pass decompresses every member, read or not.
            self._account(member.size)
            yield member

    def entries(self) -> list[SourceEntry]:
        """List regular file entries in archive order."""
        self._consumed = 0
        try:
            if self.format.is_zip:
                with zipfile.ZipFile(self.path) as zf:
                    return [SourceEntry(i.filename, i.file_size) for i in self._zip_members(zf)]
            with tarfile.open(self.path, mode=self.format.tar_stream_mode) as tf:
                return [SourceEntry(m.name, m.size) for m in self._tar_members(tf)]
        except ArchiveError:
            raise
        except _ARCHIVE_ERRORS as e:
            raise self._error(f"corrupt archive: {e}") from e

    def iter_python_sources(self) -> Iterator[tuple[SourceEntry, str]]:
        """Yield ``(entry, text)`` for every ``.py`` entry in one pass.

        Entries larger than ``max_entry_bytes`` are skipped with a warning.
        """
        self._consumed = 0
        try:
            if self.format.is_zip:
                with zipfile.ZipFile(self.path) as zf:
                    for info in self._zip_members(zf):
                        entry = SourceEntry(info.filename, info.file_size)
                        if not entry.is_python_source or self._oversized(entry):
                            continue
                        with zf.open(info) as fh:
                            yield entry, decode_source(self._read(fh))
                return

            with tarfile.open(self.path, mode=self.format.tar_stream_mode) as tf:
                for member in self._tar_members(tf):
                    entry = SourceEntry(member.name, member.size)
                    if not entry.is_python_source or self._oversized(entry):
                        continue
                    fh = tf.extractfile(member)
                    if fh is None:
                        continue
                    yield entry, decode_source(fh.read())
        except ArchiveError:
            raise
        except _ARCHIVE_ERRORS as e:
            raise self._error(f"corrupt archive: {e}") from e

    def _oversized(self, entry: SourceEntry) -> bool:
        if entry.size_bytes > self.max_entry_bytes:
            log.warning(
                "Skipping %s in %s: %d bytes exceeds the %d byte entry limit",
                entry.path,
                self.path.name,
                entry.size_bytes,
                self.max_entry_bytes,
            )
            return True
        return False

    def read_text(self, entry: SourceEntry | str) -> str:
        """Decode one entry's text.

        Raises:
            EntryNotFoundError: If the archive has no such regular file.
        """
        path = entry.path if isinstance(entry, SourceEntry) else entry
        self._consumed = 0
        try:
            if self.format.is_zip:
                with zipfile.ZipFile(self.path) as zf:
                    for info in self._zip_members(zf):
                        if info.filename == path:
                            with zf.open(info) as fh:
                                return decode_source(self._read(fh))
            else:
                with tarfile.open(self.path, mode=self.format.tar_stream_mode) as tf:
                    for member in self._tar_members(tf):
                        if member.name == path:
                            fh = tf.extractfile(member)
                            if fh is not None:
                                return decode_source(fh.read())
        except ArchiveError:
            raise
        except _ARCHIVE_ERRORS as e:
            raise self._error(f"corrupt archive: {e}") from e
        raise EntryNotFoundError(
            f"{self.path.name}: no entry {path!r}", self.package, self.release
        )


def list_source_entries(
    archive_path: Path, fmt: Optional[ArchiveFormat] = None
) -> list[SourceEntry]:
    """List the regular file entries of an archive."""
    return SdistArchive(archive_path, fmt).entries()


def read_entry_text(archive_path: Path, entry: SourceEntry | str) -> str:
    """Decode the text of one archive entry."""
    return SdistArchive(archive_path).read_text(entry)
