"""Database connection, schema versioning and session management."""

from contextlib import contextmanager
from pathlib import Path
from typing import Generator

from sqlalchemy import Engine, create_engine, event, inspect
from sqlalchemy.orm import Session, sessionmaker

from pypi_census.db.models import Base, SchemaInfo
from pypi_census.errors import SchemaMismatchError, StoreError

SCHEMA_VERSION = "1"
SCHEMA_KEY = "schema_version"


def get_database_url(store_path: Path) -> str:
    """SQLite connection URL for a store file."""
    return f"sqlite:///{Path(store_path)}"


def _enable_foreign_keys(dbapi_connection, connection_record) -> None:
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA foreign_keys=ON")
    cursor.close()


def create_db_engine(database_url: str) -> Engine:
    """Create a SQLAlchemy engine with foreign keys enforced.

    Args:
        database_url: The database URL to connect to.
    """
    engine = create_engine(
        database_url,
        echo=False,
        connect_args={"check_same_thread": False},  # SQLite specific
    )
    event.listen(engine, "connect", _enable_foreign_keys)
    return engine


def check_schema(engine: Engine) -> None:
    """Refuse stores written by a different schema version.

    Raises:
        SchemaMismatchError: If the stored version differs, or tables exist
            without a recorded version.
    """
    tables = set(inspect(engine).get_table_names())
    if not tables:
        return
    if SchemaInfo.__tablename__ not in tables:
        raise SchemaMismatchError(f"store has no schema version (expected {SCHEMA_VERSION})")
    with Session(engine) as session:
        row = session.get(SchemaInfo, SCHEMA_KEY)
    if row is None or row.value != SCHEMA_VERSION:
        found = row.value if row else "none"
        raise SchemaMismatchError(
            f"store schema version {found} does not match expected {SCHEMA_VERSION}"
        )


def init_database(store_path: Path) -> Engine:
    """Create the store file and its tables, or open an existing compatible one.

    Args:
        store_path: Path to the SQLite file. Parent directories are created.

    Returns:
        Engine bound to the store.
    """
    store_path = Path(store_path)
    try:
        store_path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise StoreError(f"Cannot create store directory {store_path.parent}: {e}") from e

    engine = create_db_engine(get_database_url(store_path))
    check_schema(engine)
    Base.metadata.create_all(engine)
    with Session(engine) as session:
        if session.get(SchemaInfo, SCHEMA_KEY) is None:
            session.add(SchemaInfo(key=SCHEMA_KEY, value=SCHEMA_VERSION))
            session.commit()
    return engine


def get_session_factory(engine: Engine) -> sessionmaker[Session]:
    return sessionmaker(bind=engine, expire_on_commit=False)


@contextmanager
def get_session(factory: sessionmaker[Session]) -> Generator[Session, None, None]:
    """Transactional session: commit on success, roll back on any error.

    Example:
        with get_session(factory) as session:
            packages = session.query(Package).all()
    """
    session = factory()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()
