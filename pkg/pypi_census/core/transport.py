"""Byte transports for registry resources: live HTTP or an offline fixture tree.

Both transports expose the same four reads. The registry client layers
caching and parsing on top, so the rest of the pipeline never knows whether
it is talking to the network.

Fixture layout::

    fixture_root/simple/index.json
    fixture_root/json/<name>.json
    fixture_root/files/<filename>
    fixture_root/repos/<owner>/<repo>/<path>
"""

import time
from pathlib import Path
from typing import Callable, Optional, Protocol
from urllib.parse import quote

import httpx

from pypi_census.core.ratelimit import RateLimiter
from pypi_census.errors import FetchError, NotFoundError
from pypi_census.log import get_logger

log = get_logger("transport")

SIMPLE_JSON = "application/vnd.pypi.simple.v1+json"
RAW_CONTENT_BASE = "https://raw.githubusercontent.com"

TRANSIENT_STATUS = {429, 500, 502, 503, 504}


class RegistryTransport(Protocol):
    """Reads raw registry resources."""

    def read_index(self) -> bytes: ...

    def read_metadata(self, name: str) -> bytes: ...

    def read_file(self, filename: str, url: str) -> bytes: ...

    def read_repo_file(self, owner: str, repo: str, path: str) -> bytes: ...

    def close(self) -> None: ...


class HttpTransport:
    """Rate-limited, retrying HTTP transport built on httpx.

    Transient failures (connection errors, timeouts, 429 and 5xx) are retried
    ``retries`` times with exponential backoff ``backoff_base * 2**n``
    (1s, 2s, 4s by default). A 404 or 410 raises NotFoundError at once.
    """

    def __init__(
        self,
        base_url: str,
        limiter: RateLimiter,
        user_agent: str,
        retries: int = 3,
        backoff_base: float = 1.0,
        timeout: float = 30.0,
        client: Optional[httpx.Client] = None,
        sleep: Callable[[float], None] = time.sleep,
        raw_content_base: str = RAW_CONTENT_BASE,
    ):
        self.base_url = base_url.rstrip("/")
        self.limiter = limiter
        self.retries = retries
        self.backoff_base = backoff_base
        self.raw_content_base = raw_content_base.rstrip("/")
        self._sleep = sleep
        self._client = client or httpx.Client(timeout=timeout, follow_redirects=True)
        self._client.headers["User-Agent"] = user_agent

    def read_index(self) -> bytes:
        return self._get(f"{self.base_url}/simple/", headers={"Accept": SIMPLE_JSON})

    def read_metadata(self, name: str) -> bytes:
        return self._get(f"{self.base_url}/pypi/{quote(name)}/json")

    def read_file(self, filename: str, url: str) -> bytes:
        return self._get(url)

    def read_repo_file(self, owner: str, repo: str, path: str) -> bytes:
        return self._get(f"{self.raw_content_base}/{owner}/{repo}/HEAD/{path}")

    def close(self) -> None:
        self._client.close()

    def _get(self, url: str, headers: Optional[dict] = None) -> bytes:
        last_error = "no attempt made"
        for attempt in range(self.retries + 1):
            if attempt:
                delay = self.backoff_base * 2 ** (attempt - 1)
                log.debug("Retrying %s in %.1fs (attempt %d)", url, delay, attempt + 1)
                self._sleep(delay)

            self.limiter.acquire()
            try:
                response = self._client.get(url, headers=headers)
            except httpx.TransportError as e:
                last_error = f"{type(e).__name__}: {e}"
                continue

            if response.status_code in (404, 410):
                raise NotFoundError(f"{url} not found", url=url)
            if response.status_code in TRANSIENT_STATUS:
                last_error = f"HTTP {response.status_code}"
                continue
            if response.is_error:
                raise FetchError(f"{url}: HTTP {response.status_code}", url=url)
            return response.content

        raise FetchError(
            f"{url}: giving up after {self.retries + 1} attempts ({last_error})", url=url
        )


class FixtureTransport:
    """Serves registry resources from a directory mirroring the endpoints."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def read_index(self) -> bytes:
        return self._read(self.root / "simple" / "index.json")

    def read_metadata(self, name: str) -> bytes:
        return self._read(self.root / "json" / f"{name}.json")

    def read_file(self, filename: str, url: str) -> bytes:
        return self._read(self.root / "files" / filename)

    def read_repo_file(self, owner: str, repo: str, path: str) -> bytes:
        target = (self.root / "repos" / owner / repo / path).resolve()
        repo_root = (self.root / "repos" / owner / repo).resolve()
        if not target.is_relative_to(repo_root):
            raise NotFoundError(f"{path} escapes repository {owner}/{repo}")
        return self._read(target)

    def close(self) -> None:
        pass

    def _read(self, path: Path) -> bytes:
        if not path.is_file():
            raise NotFoundError(f"{path} not found", url=str(path))
        try:
            return path.read_bytes()
        except OSError as e:
            raise FetchError(f"{path}: {e}", url=str(path)) from e
