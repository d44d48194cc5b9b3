"""Tests for CLI commands."""

import json
from pathlib import Path

import pytest
from sqlalchemy.orm import Session
from typer.testing import CliRunner

from pypi_census import __version__
from pypi_census.cli.main import app
from pypi_census.config import CONFIG_FILE, DEFAULT_DIR
from pypi_census.db.database import SCHEMA_KEY, init_database
from pypi_census.db.models import SchemaInfo
from pypi_census.db.repository import CensusStore

runner = CliRunner()


@pytest.fixture
def workspace(tmp_path: Path, monkeypatch) -> Path:
    """An empty working directory."""
    monkeypatch.chdir(tmp_path)
    return tmp_path


def store_args(workspace: Path) -> list[str]:
    return [
        "--store",
        str(workspace / "census.db"),
        "--cache-dir",
        str(workspace / "cache"),
    ]


class TestInitCommand:
    """Tests for the init command."""

    def test_init_creates_files(self, workspace: Path) -> None:
        """Test that init writes the config file and the store."""
        result = runner.invoke(app, ["init"])

        assert result.exit_code == 0
        assert (workspace / CONFIG_FILE).exists()
        assert (workspace / DEFAULT_DIR / "census.db").exists()

    def test_init_with_path(self, tmp_path: Path) -> None:
        """Test init with an explicit directory."""
        target = tmp_path / "project"
        result = runner.invoke(app, ["init", str(target)])

        assert result.exit_code == 0
        assert (target / CONFIG_FILE).exists()

    def test_init_twice(self, workspace: Path) -> None:
        """Test init refuses to overwrite without --force."""
        runner.invoke(app, ["init"])
        result = runner.invoke(app, ["init"])

        assert result.exit_code == 1
        assert "--force" in result.output

    def test_init_force(self, workspace: Path) -> None:
        """Test init --force rewrites the config file."""
        runner.invoke(app, ["init"])
        (workspace / CONFIG_FILE).write_text("jobs: 3\n")

        result = runner.invoke(app, ["init", "--force"])

        assert result.exit_code == 0
        assert "jobs: 8" in (workspace / CONFIG_FILE).read_text()


class TestRunCommand:
    """Tests for the full pipeline command."""

    def test_run_fixture(self, workspace: Path, fixture_registry: Path) -> None:
        """Test a full offline run writes reports that the report command shows."""
        out = workspace / "reports"
        result = runner.invoke(
            app,
            ["run", "--fixture", str(fixture_registry), "--out", str(out), "-j", "2"]
            + store_args(workspace),
        )

        assert result.exit_code == 0, result.output
        assert (out / "manifest.json").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["reports"][0]["name"] == "summary"

        shown = runner.invoke(app, ["report", "summary", "--out", str(out)])
        assert shown.exit_code == 0
        assert "packages" in shown.output

    def test_selected_stages(self, workspace: Path, fixture_registry: Path) -> None:
        """Test --stages runs only the listed stages."""
        result = runner.invoke(
            app,
            ["run", "--stages", "index,metadata", "--fixture", str(fixture_registry)]
            + store_args(workspace),
        )

        assert result.exit_code == 0, result.output
        with CensusStore(workspace / "census.db") as store:
            assert store.package_names()
            assert store.scan_summary() == {}

    def test_unknown_stage(self, workspace: Path) -> None:
        """Test an unknown stage name is a usage error."""
        result = runner.invoke(app, ["run", "--stages", "bogus"])
        assert result.exit_code == 2

    def test_fixture_and_base_url_conflict(self, workspace: Path, fixture_registry: Path) -> None:
        """Test --fixture and --base-url cannot be combined."""
        result = runner.invoke(
            app,
            ["fetch-index", "--fixture", str(fixture_registry), "--base-url", "https://x.test"],
        )

        assert result.exit_code == 2
        assert "mutually exclusive" in result.output


class TestStageCommands:
    """Tests for the single-stage commands."""

    def test_fetch_index(self, workspace: Path, fixture_registry: Path) -> None:
        """Test fetch-index fills the store."""
        result = runner.invoke(
            app, ["fetch-index", "--fixture", str(fixture_registry)] + store_args(workspace)
        )

        assert result.exit_code == 0, result.output
        assert (workspace / "census.db").exists()

    def test_metadata_without_index(self, workspace: Path, fixture_registry: Path) -> None:
        """Test fetch-metadata on an empty store is a usage error."""
        result = runner.invoke(
            app, ["fetch-metadata", "--fixture", str(fixture_registry)] + store_args(workspace)
        )

        assert result.exit_code == 2
        assert "fetch-index" in result.output

    def test_stats_without_scan(self, workspace: Path) -> None:
        """Test stats before any scan is a usage error."""
        result = runner.invoke(app, ["stats", "--store", str(workspace / "census.db")])

        assert result.exit_code == 2

    def test_stats_and_report_accept_fixture(self, workspace: Path, fixture_registry: Path) -> None:
        """Test stats and report take --fixture like the fetching commands."""
        out = workspace / "reports"
        stages = "index,metadata,sdists,scan,licenses"
        fetched = runner.invoke(
            app, ["run", "--stages", stages, "--fixture", str(fixture_registry)] + store_args(workspace)
        )
        assert fetched.exit_code == 0, fetched.output

        store = ["--store", str(workspace / "census.db")]
        result = runner.invoke(
            app, ["stats", "--fixture", str(fixture_registry), "--out", str(out)] + store
        )
        assert result.exit_code == 0, result.output

        shown = runner.invoke(
            app, ["report", "summary", "--fixture", str(fixture_registry), "--out", str(out)]
        )
        assert shown.exit_code == 0
        assert "packages" in shown.output

    def test_invalid_format(self, workspace: Path) -> None:
        """Test an unsupported report format is rejected."""
        result = runner.invoke(app, ["stats", "--format", "xml"])

        assert result.exit_code == 2
        assert "Invalid configuration" in result.output

    def test_schema_mismatch(self, workspace: Path) -> None:
        """Test a store from another schema version exits with status 3."""
        path = workspace / "census.db"
        engine = init_database(path)
        with Session(engine) as session:
            session.get(SchemaInfo, SCHEMA_KEY).value = "0"
            session.commit()
        engine.dispose()

        result = runner.invoke(app, ["stats", "--store", str(path)])

        assert result.exit_code == 3

    def test_report_missing(self, workspace: Path) -> None:
        """Test showing a report before any were written."""
        result = runner.invoke(app, ["report", "summary", "--out", str(workspace / "none")])

        assert result.exit_code == 1


class TestExtractCommand:
    """Tests for the extract command."""

    def test_extract_legacy_file(self, workspace: Path) -> None:
        """Test a legacy source file prints statements and its stage."""
        source = workspace / "old.py"
        source.write_text("import os\nprint 'hi'\nfrom sys import argv\n")

        result = runner.invoke(app, ["extract", str(source), "--stage"])

        assert result.exit_code == 0
        records = [json.loads(line) for line in result.output.splitlines() if line.startswith("{")]
        assert [r["module"] for r in records] == ["os", "sys"]
        assert {r["stage"] for r in records} == {"legacy_transform"}

    def test_extract_missing_file(self, workspace: Path) -> None:
        """Test a missing file is a usage error."""
        result = runner.invoke(app, ["extract", str(workspace / "nope.py")])
        assert result.exit_code == 2


class TestVersion:
    """Tests for the version flag."""

    def test_version(self) -> None:
        """Test --version prints the package version."""
        result = runner.invoke(app, ["--version"])

        assert result.exit_code == 0
        assert __version__ in result.output
