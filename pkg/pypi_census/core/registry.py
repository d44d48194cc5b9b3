"""Registry client: package index, metadata documents and sdist archives.

Records produced here are frozen dataclasses so they can be handed between
worker threads freely.
"""

import hashlib
import html
import json
import os
import re
import tempfile
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from pypi_census.config import CensusSettings
from pypi_census.core.ratelimit import RateLimiter
from pypi_census.core.transport import FixtureTransport, HttpTransport, RegistryTransport
from pypi_census.errors import (
    IndexParseError,
    IntegrityError,
    InvalidNameError,
    MetadataParseError,
    NotFoundError,
    ParseError,
)
from pypi_census.log import get_logger

log = get_logger("registry")

CANONICAL_NAME_RE = re.compile(r"^[a-z0-9]([a-z0-9-]*[a-z0-9])?$")
_SEPARATORS_RE = re.compile(r"[-_.]+")
_ANCHOR_RE = re.compile(r"<a\b[^>]*>(.*?)</a>", re.IGNORECASE | re.DOTALL)


def normalize_package_name(raw: str) -> str:
    """Normalize a listed project name to its canonical form.

    Lowercases and collapses runs of ``-``, ``_`` and ``.`` to a single ``-``.

    Raises:
        InvalidNameError: If the name is empty or still not canonical after
            normalization (stray spaces, leading separators, other symbols).
    """
    if not raw:
        raise InvalidNameError("package name is empty")
    name = _SEPARATORS_RE.sub("-", raw).lower()
    if not CANONICAL_NAME_RE.match(name):
        raise InvalidNameError(f"cannot normalize package name {raw!r}")
    return name


def parse_timestamp(value: Any) -> Optional[datetime]:
    """Parse a registry timestamp into an aware UTC datetime."""
    if value in (None, ""):
        return None
    if not isinstance(value, str):
        raise ValueError(f"timestamp is not a string: {value!r}")
    parsed = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if parsed.tzinfo is None:
        return parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


class PackageType(Enum):
    """Distribution file kinds as reported by the registry."""

    SDIST = "sdist"
    BDIST_WHEEL = "bdist_wheel"
    BDIST_EGG = "bdist_egg"
    OTHER = "other"

    @classmethod
    def parse(cls, value: Optional[str]) -> "PackageType":
        try:
            return cls(value)
        except ValueError:
            return cls.OTHER


@dataclass(frozen=True)
class DistFile:
    """One distribution file of a release."""

    filename: str
    package_type: PackageType
    size_bytes: int
    upload_time: Optional[datetime]
    url: str
    sha256: Optional[str] = None

    def __post_init__(self):
        if self.size_bytes < 0:
            raise ValueError(f"{self.filename}: negative size")


@dataclass(frozen=True)
class ReleaseRecord:
    """One version of a package. Its upload time is the earliest file upload."""

    version: str
    files: tuple[DistFile, ...] = ()

    @property
    def upload_time(self) -> Optional[datetime]:
        times = [f.upload_time for f in self.files if f.upload_time is not None]
        return min(times) if times else None

    @property
    def size_bytes(self) -> int:
        return sum(f.size_bytes for f in self.files)

    @property
    def sdists(self) -> list[DistFile]:
        return [f for f in self.files if f.package_type is PackageType.SDIST]


def _release_sort_key(release: ReleaseRecord) -> tuple:
    upload = release.upload_time
    return (upload is None, upload or datetime.min.replace(tzinfo=timezone.utc), release.version)


@dataclass(frozen=True)
class PackageRecord:
    """One registry package with its releases sorted by first upload."""

    name: str
    raw_name: str
    author: Optional[str] = None
    maintainer: Optional[str] = None
    home_page: Optional[str] = None
    license_field: Optional[str] = None
    classifiers: tuple[str, ...] = ()
    releases: tuple[ReleaseRecord, ...] = ()
    author_email: Optional[str] = None
    maintainer_email: Optional[str] = None
    gone: bool = False

    def __post_init__(self):
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        object.__setattr__(
            self, "releases", tuple(sorted(self.releases, key=_release_sort_key))
        )

    @classmethod
    def gone_marker(cls, name: str) -> "PackageRecord":
        """Record for a listed package whose metadata has disappeared."""
        return cls(name=name, raw_name=name, gone=True)

    @property
    def first_upload(self) -> Optional[datetime]:
        times = [r.upload_time for r in self.releases if r.upload_time is not None]
        return min(times) if times else None


class RegistrySource(BaseModel):
    """Where registry data comes from: a live endpoint or a fixture tree."""

    model_config = ConfigDict(frozen=True)

    mode: Literal["live", "fixture"]
    base_url: Optional[str] = None
    fixture_root: Optional[Path] = None
    cache_dir: Path
    rate_limit: float = 5.0
    user_agent: str = "pypi-census"

    @model_validator(mode="after")
    def _check_mode(self) -> "RegistrySource":
        if self.mode == "live":
            if not self.base_url or self.fixture_root is not None:
                raise ValueError("live mode needs base_url and no fixture_root")
            if self.rate_limit <= 0:
                raise ValueError("rate_limit must be positive in live mode")
        elif self.fixture_root is None or self.base_url is not None:
            raise ValueError("fixture mode needs fixture_root and no base_url")
        return self

    @classmethod
    def from_settings(cls, settings: CensusSettings) -> "RegistrySource":
        if settings.fixture_root is not None:
            return cls(
                mode="fixture",
                fixture_root=settings.fixture_root,
                cache_dir=settings.cache_dir,
                rate_limit=settings.rate_limit,
                user_agent=settings.user_agent,
            )
        return cls(
            mode="live",
            base_url=settings.base_url,
            cache_dir=settings.cache_dir,
            rate_limit=settings.rate_limit,
            user_agent=settings.user_agent,
        )


class ResponseCache:
    """On-disk cache keyed by relative path.

    Reads are lock-free; writes for the same key are serialized and land
    atomically through a temporary file and ``os.replace``.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def path_for(self, key: str) -> Path:
        return self.root / key

    def lock_for(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    def get(self, key: str) -> Optional[bytes]:
        path = self.path_for(key)
        return path.read_bytes() if path.is_file() else None

    def put(self, key: str, data: bytes) -> Path:
        path = self.path_for(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".partial-")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        return path

    def evict(self, key: str) -> None:
        self.path_for(key).unlink(missing_ok=True)


def parse_index(payload: bytes) -> list[str]:
    """Parse a simple-API project list (JSON or HTML anchors), order preserved."""
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as e:
        raise IndexParseError(f"index is not UTF-8: {e}") from e

    stripped = text.strip()
    if not stripped:
        return []

    if stripped.startswith("{"):
        try:
            document = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise IndexParseError(f"index JSON is malformed: {e}") from e
        projects = document.get("projects") if isinstance(document, dict) else None
        if not isinstance(projects, list):
            raise IndexParseError("index JSON has no 'projects' list")
        names = []
        for item in projects:
            name = item.get("name") if isinstance(item, dict) else item
            if not isinstance(name, str):
                raise IndexParseError(f"index entry without a name: {item!r}")
            names.append(name)
        return names

    if stripped.startswith("<"):
        return [html.unescape(m.group(1)).strip() for m in _ANCHOR_RE.finditer(stripped)]

    raise IndexParseError("index is neither JSON nor HTML")


def _parse_file(entry: dict) -> DistFile:
    digests = entry.get("digests") or {}
    return DistFile(
        filename=entry["filename"],
        package_type=PackageType.parse(entry.get("packagetype")),
        size_bytes=int(entry.get("size") or 0),
        upload_time=parse_timestamp(
            entry.get("upload_time_iso_8601") or entry.get("upload_time")
        ),
        url=entry.get("url") or "",
        sha256=digests.get("sha256"),
    )


def _optional_text(value: Any) -> Optional[str]:
    if isinstance(value, str) and value.strip():
        return value
    return None


def parse_metadata(name: str, payload: bytes) -> PackageRecord:
    """Build a PackageRecord from a ``/pypi/<name>/json`` document.

    Raises:
        MetadataParseError: If the document is not the expected JSON shape.
    """
    try:
        document = json.loads(payload)
        info = document["info"]
        releases_map = document.get("releases") or {}
        if not isinstance(info, dict) or not isinstance(releases_map, dict):
            raise TypeError("info/releases have the wrong type")

        releases = [
            ReleaseRecord(version=str(version), files=tuple(_parse_file(f) for f in files or []))
            for version, files in releases_map.items()
        ]
        raw_name = info.get("name") or name
        return PackageRecord(
            name=normalize_package_name(raw_name),
            raw_name=raw_name,
            author=_optional_text(info.get("author")),
            maintainer=_optional_text(info.get("maintainer")),
            home_page=_optional_text(info.get("home_page")),
            license_field=_optional_text(info.get("license")),
            classifiers=tuple(info.get("classifiers") or ()),
            releases=tuple(releases),
            author_email=_optional_text(info.get("author_email")),
            maintainer_email=_optional_text(info.get("maintainer_email")),
        )
    except (ValueError, KeyError, TypeError) as e:
        raise MetadataParseError(name, f"malformed metadata: {e}") from e


class RegistryClient:
    """Cached access to one registry source."""

    def __init__(
        self,
        source: RegistrySource,
        transport: Optional[RegistryTransport] = None,
        retries: int = 3,
        backoff_base: float = 1.0,
        timeout: float = 30.0,
    ):
        self.source = source
        self.cache = ResponseCache(source.cache_dir)
        self.limiter = RateLimiter(source.rate_limit) if source.mode == "live" else None
        if transport is not None:
            self.transport = transport
        elif source.mode == "fixture":
            self.transport = FixtureTransport(source.fixture_root)
        else:
            self.transport = HttpTransport(
                base_url=source.base_url,
                limiter=self.limiter,
                user_agent=source.user_agent,
                retries=retries,
                backoff_base=backoff_base,
                timeout=timeout,
            )

    @classmethod
    def from_settings(cls, settings: CensusSettings) -> "RegistryClient":
        return cls(
            RegistrySource.from_settings(settings),
            retries=settings.retries,
            backoff_base=settings.backoff_base,
            timeout=settings.request_timeout,
        )

    def __enter__(self) -> "RegistryClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        self.transport.close()

    def _cached(self, key: str, read, refresh: bool, parse=None):
        """Cached bytes for ``key``, passed through ``parse`` when given.

        Fresh payloads are parsed before they are written, so a malformed
        response never reaches the cache. A cached entry that no longer
        parses is dropped and fetched again.
        """
        parse = parse or (lambda data: data)
        if not refresh:
            cached = self.cache.get(key)
            if cached is not None:
                try:
                    return parse(cached)
                except ParseError:
                    log.warning("Dropping unreadable cache entry %s", key)
                    self.cache.evict(key)
        with self.cache.lock_for(key):
            if not refresh:
                cached = self.cache.get(key)
                if cached is not None:
                    return parse(cached)
            data = read()
            value = parse(data)
            self.cache.put(key, data)
            return value

    def fetch_package_index(self, refresh: bool = False) -> list[str]:
        """Return every listed project name in listing order (duplicates kept)."""
        return self._cached("simple/index.json", self.transport.read_index, refresh, parse_index)

    def fetch_package_metadata(self, name: str, refresh: bool = False) -> PackageRecord:
        """Fetch and parse one package's metadata.

        A 404 yields a gone marker instead of an error so long crawls can
        continue past packages deleted mid-run.

        Raises:
            MetadataParseError: If the document is malformed; nothing is cached.
        """
        try:
            return self._cached(
                f"json/{name}.json",
                lambda: self.transport.read_metadata(name),
                refresh,
                lambda payload: parse_metadata(name, payload),
            )
        except NotFoundError:
            log.warning("Package %s is gone from the registry", name)
            return PackageRecord.gone_marker(name)

    def fetch_sdist(self, file: DistFile, refresh: bool = False) -> Path:
        """Download (or reuse) a source distribution archive.

        Raises:
            ValueError: If the file is not an sdist or its name is unsafe.
            IntegrityError: If size or sha256 disagree with the metadata.
            FetchError: If the download fails after retries.
        """
        if file.package_type is not PackageType.SDIST:
            raise ValueError(f"{file.filename} is not an sdist")
        if "/" in file.filename or "\\" in file.filename or file.filename in ("", ".", ".."):
            raise ValueError(f"unsafe archive file name {file.filename!r}")

        key = f"files/{file.filename}"
        path = self.cache.path_for(key)
        if not refresh and path.is_file() and _matches(file, path.read_bytes()):
            return path

        with self.cache.lock_for(key):
            if not refresh and path.is_file() and _matches(file, path.read_bytes()):
                return path
            data = self.transport.read_file(file.filename, file.url)
            _verify(file, data)
            return self.cache.put(key, data)

    def read_repo_file(self, owner: str, repo: str, path: str) -> Optional[bytes]:
        """Read a file from a code-hosting repository; None when missing."""
        try:
            return self._cached(
                f"repos/{owner}/{repo}/{path}",
                lambda: self.transport.read_repo_file(owner, repo, path),
                refresh=False,
            )
        except NotFoundError:
            return None

    def fetch_license_file(
        self, home_page: Optional[str], license_field: Optional[str]
    ) -> Optional[str]:
        """License file text from the package's repository, or None."""
        from pypi_census.core.licenses import fetch_license_file

        return fetch_license_file(self, home_page, license_field)


def _verify(file: DistFile, data: bytes) -> None:
    if file.size_bytes and len(data) != file.size_bytes:
        raise IntegrityError(
            f"{file.filename}: expected {file.size_bytes} bytes, got {len(data)}"
        )
    if file.sha256 and hashlib.sha256(data).hexdigest() != file.sha256.lower():
        raise IntegrityError(f"{file.filename}: sha256 mismatch")


def _matches(file: DistFile, data: bytes) -> bool:
    try:
        _verify(file, data)
    except IntegrityError:
        return False
    return True


def fetch_package_index(src: RegistrySource) -> list[str]:
    """One-shot index fetch for a source."""
    with RegistryClient(src) as client:
        return client.fetch_package_index()


def fetch_package_metadata(src: RegistrySource, name: str) -> PackageRecord:
    """One-shot metadata fetch for a source."""
    with RegistryClient(src) as client:
        return client.fetch_package_metadata(name)


def fetch_sdist(src: RegistrySource, file: DistFile) -> Path:
    """One-shot sdist download for a source."""
    with RegistryClient(src) as client:
        return client.fetch_sdist(file)
