"""Configuration management for pypi-census."""

from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import Field, PositiveFloat, PositiveInt
from pydantic_settings import BaseSettings, SettingsConfigDict

from pypi_census import __version__

# Config file name
CONFIG_FILE = ".pypi-census.yaml"
DEFAULT_DIR = ".pypi-census"

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_RULES_PATH = DATA_DIR / "license_rules.tsv"
DEFAULT_AUTHOR_TERMS_PATH = DATA_DIR / "author_terms.yaml"

DEFAULT_UNIQUE_IMPORTERS = ["os", "sys", "re", "django", "ccxt", "numpy"]

GIB = 1024**3
MIB = 1024**2


class CensusSettings(BaseSettings):
    """Main configuration for pypi-census.

    Values come from (highest first) explicit overrides, ``PYPI_CENSUS_*``
    environment variables, the ``.pypi-census.yaml`` file, then defaults.
    """

    model_config = SettingsConfigDict(env_prefix="PYPI_CENSUS_", extra="ignore")

    # Registry access
    base_url: str = "https://pypi.org"
    fixture_root: Optional[Path] = None
    cache_dir: Path = Path(DEFAULT_DIR) / "cache"
    rate_limit: PositiveFloat = 5.0
    jobs: PositiveInt = 8
    user_agent: str = f"pypi-census/{__version__}"
    retries: PositiveInt = 3
    backoff_base: float = 1.0
    request_timeout: PositiveFloat = 30.0

    # Archives
    archive_cap_bytes: PositiveInt = 4 * GIB
    max_entry_bytes: PositiveInt = 16 * MIB

    # Store and reports
    store_path: Path = Path(DEFAULT_DIR) / "census.db"
    output_dir: Path = Path("reports")
    output_format: Literal["csv", "json"] = "csv"
    failure_threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    corpus_id: Optional[str] = None

    # Rule data
    rules_path: Path = DEFAULT_RULES_PATH
    author_terms_path: Path = DEFAULT_AUTHOR_TERMS_PATH

    # Statistics
    cagr_start_year: Optional[int] = None
    cagr_end_year: Optional[int] = None
    cagr_inclusive: bool = True
    top_n: PositiveInt = 20
    unique_importers: list[str] = Field(
        default_factory=lambda: list(DEFAULT_UNIQUE_IMPORTERS)
    )

    @classmethod
    def load(cls, project_path: Path | None = None, **overrides) -> "CensusSettings":
        """Load settings from .pypi-census.yaml, then apply overrides.

        Args:
            project_path: Directory holding the config file. If None, uses cwd.
            **overrides: Explicit values (CLI flags); None values are ignored.

        Returns:
            CensusSettings instance with loaded or default values.
        """
        if project_path is None:
            project_path = Path.cwd()

        data: dict = {}
        config_file = project_path / CONFIG_FILE
        if config_file.exists():
            with open(config_file) as f:
                data = yaml.safe_load(f) or {}

        # Environment variables outrank the file: drop file keys that the
        # environment will supply.
        env_backed = cls().model_dump(exclude_unset=True)
        for key in env_backed:
            data.pop(key, None)

        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def save(self, project_path: Path | None = None) -> None:
        """Save settings to .pypi-census.yaml.

        Args:
            project_path: Directory to write into. If None, uses cwd.
        """
        if project_path is None:
            project_path = Path.cwd()

        config_file = project_path / CONFIG_FILE
        with open(config_file, "w") as f:
            yaml.dump(
                self.model_dump(mode="json"), f, default_flow_style=False, sort_keys=False
            )


def get_default_config_template() -> str:
    """Get the default configuration file template."""
    return """# pypi-census configuration
# Every key can also be set through a PYPI_CENSUS_<KEY> environment variable.

base_url: https://pypi.org
# fixture_root: tests/fixtures/registry   # offline mirror, no network
cache_dir: .pypi-census/cache
store_path: .pypi-census/census.db
rate_limit: 5.0
jobs: 8
output_dir: reports
output_format: csv
"""
