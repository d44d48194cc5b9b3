"""Pytest fixtures for pypi-census tests."""

import os
from pathlib import Path
from typing import Generator

import pytest
from sqlalchemy.orm import Session

from pypi_census.config import CensusSettings
from pypi_census.db.database import get_session_factory, init_database
from pypi_census.db.repository import CensusStore
from tests.fixture_registry import build_fixture_registry


@pytest.fixture(autouse=True)
def ensure_valid_cwd(tmp_path):
    """Ensure each test starts with a valid working directory."""
    try:
        os.getcwd()
    except FileNotFoundError:
        os.chdir(tmp_path)
    yield
    try:
        os.getcwd()
    except FileNotFoundError:
        os.chdir(tmp_path)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep PYPI_CENSUS_* variables from the outer shell out of the tests."""
    for key in list(os.environ):
        if key.startswith("PYPI_CENSUS_"):
            monkeypatch.delenv(key)


@pytest.fixture(scope="session")
def fixture_registry(tmp_path_factory) -> Path:
    """The offline mini-registry, built once per session."""
    return build_fixture_registry(tmp_path_factory.mktemp("registry"))


@pytest.fixture
def census_settings(tmp_path: Path, fixture_registry: Path) -> CensusSettings:
    """Settings pointing at the fixture registry and a fresh workspace."""
    return CensusSettings(
        fixture_root=fixture_registry,
        cache_dir=tmp_path / "cache",
        store_path=tmp_path / "census.db",
        output_dir=tmp_path / "reports",
        jobs=2,
    )


@pytest.fixture
def store(tmp_path: Path) -> Generator[CensusStore, None, None]:
    """An empty store in a temporary directory."""
    census_store = CensusStore(tmp_path / "store" / "census.db")
    yield census_store
    census_store.close()


@pytest.fixture
def db_session(tmp_path: Path) -> Generator[Session, None, None]:
    """A session on an empty store."""
    engine = init_database(tmp_path / "session" / "census.db")
    session = get_session_factory(engine)()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()
        engine.dispose()
