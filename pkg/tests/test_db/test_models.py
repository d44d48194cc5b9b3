"""Tests for database models and schema versioning."""

from datetime import datetime

import pytest
from sqlalchemy import func, select, text
from sqlalchemy.exc import IntegrityError
from sqlalchemy.orm import Session

from pypi_census.db.database import (
    SCHEMA_KEY,
    SCHEMA_VERSION,
    create_db_engine,
    get_database_url,
    init_database,
)
from pypi_census.db.models import (
    ImportRow,
    LicenseRow,
    Package,
    Release,
    ReleaseFile,
    ScanStatus,
    SchemaInfo,
)
from pypi_census.errors import SchemaMismatchError


def count(session: Session, model) -> int:
    return session.execute(select(func.count()).select_from(model)).scalar_one()


class TestPackageModel:
    """Tests for the Package model."""

    def test_create_package(self, db_session: Session) -> None:
        """Test creating a package with defaults."""
        package = Package(name="requests", raw_name="Requests")
        db_session.add(package)
        db_session.flush()

        assert package.id is not None
        assert package.classifiers == []
        assert package.gone is False
        assert package.license is None

    def test_name_unique(self, db_session: Session) -> None:
        """Test that canonical names must be unique."""
        db_session.add(Package(name="dup", raw_name="dup"))
        db_session.flush()
        db_session.add(Package(name="dup", raw_name="DUP"))

        with pytest.raises(IntegrityError):
            db_session.flush()

        db_session.rollback()

    def test_repr(self, db_session: Session) -> None:
        """Test the string representation of a package."""
        package = Package(name="my-pkg", raw_name="my_pkg")
        db_session.add(package)
        db_session.flush()

        assert "my-pkg" in repr(package)


class TestReleaseModel:
    """Tests for releases and their children."""

    def build(self, db_session: Session) -> Package:
        release = Release(version="1.0", upload_time=datetime(2015, 3, 1), size_bytes=10)
        release.files.append(
            ReleaseFile(filename="pkg-1.0.tar.gz", package_type="sdist", size_bytes=10, url="u")
        )
        package = Package(name="pkg", raw_name="pkg", releases=[release])
        db_session.add(package)
        db_session.flush()
        db_session.add(
            ImportRow(release_id=release.id, line=1, module="os", stage="strict_parse")
        )
        db_session.add(ScanStatus(release_id=release.id, status="scanned"))
        db_session.flush()
        return package

    def test_version_unique_per_package(self, db_session: Session) -> None:
        """Test a package cannot list the same version twice."""
        package = self.build(db_session)
        package.releases.append(Release(version="1.0"))

        with pytest.raises(IntegrityError):
            db_session.flush()

        db_session.rollback()

    def test_delete_cascades(self, db_session: Session) -> None:
        """Test deleting a package removes releases, files, imports and scan status."""
        package = self.build(db_session)
        db_session.add(
            LicenseRow(
                package_id=package.id,
                family="MIT",
                name="MIT",
                version="n/a",
                source="metadata_field",
                rule_version="t",
            )
        )
        db_session.flush()
        db_session.expire_all()

        db_session.delete(db_session.get(Package, package.id))
        db_session.flush()

        for model in (Release, ReleaseFile, ImportRow, ScanStatus, LicenseRow):
            assert count(db_session, model) == 0

    def test_foreign_keys_enforced(self, db_session: Session) -> None:
        """Test an import row cannot point at a missing release."""
        db_session.add(ImportRow(release_id=999, line=1, module="os", stage="strict_parse"))

        with pytest.raises(IntegrityError):
            db_session.flush()

        db_session.rollback()


class TestSchemaVersion:
    """Tests for schema version checks."""

    def test_version_recorded(self, db_session: Session) -> None:
        """Test a new store records its schema version."""
        assert db_session.get(SchemaInfo, SCHEMA_KEY).value == SCHEMA_VERSION

    def test_reopen_compatible(self, tmp_path) -> None:
        """Test reopening a store of the same version."""
        path = tmp_path / "census.db"
        init_database(path).dispose()
        init_database(path).dispose()

    def test_version_mismatch(self, tmp_path) -> None:
        """Test a store of another version is refused."""
        path = tmp_path / "census.db"
        engine = init_database(path)
        with Session(engine) as session:
            session.get(SchemaInfo, SCHEMA_KEY).value = "0"
            session.commit()
        engine.dispose()

        with pytest.raises(SchemaMismatchError, match="version 0"):
            init_database(path)

    def test_foreign_tables_without_version(self, tmp_path) -> None:
        """Test a database with tables but no version is refused."""
        path = tmp_path / "other.db"
        engine = create_db_engine(get_database_url(path))
        with engine.begin() as conn:
            conn.execute(text("CREATE TABLE other (id INTEGER)"))
        engine.dispose()

        with pytest.raises(SchemaMismatchError):
            init_database(path)
