"""Init command - create a config file and an empty store."""

from pathlib import Path

import typer

from pypi_census.cli.formatters import print_error, print_success, print_warning
from pypi_census.config import CONFIG_FILE, DEFAULT_DIR, get_default_config_template
from pypi_census.db.database import init_database
from pypi_census.errors import SchemaMismatchError


def init_command(
    path: Path = typer.Argument(
        Path("."),
        help="Directory to initialize (default: current directory)",
    ),
    force: bool = typer.Option(
        False,
        "--force",
        "-f",
        help="Overwrite an existing config file",
    ),
) -> None:
    """Write a default .pypi-census.yaml and create the store."""
    project_path = path.resolve()
    config_file = project_path / CONFIG_FILE

    if config_file.exists() and not force:
        print_warning(f"{CONFIG_FILE} already exists in {project_path}")
        print_warning("Use --force to overwrite it")
        raise typer.Exit(1)

    project_path.mkdir(parents=True, exist_ok=True)
    config_file.write_text(get_default_config_template())

    try:
        init_database(project_path / DEFAULT_DIR / "census.db").dispose()
    except SchemaMismatchError as e:
        print_error(str(e))
        raise typer.Exit(3) from None

    print_success(f"Initialized pypi-census in {project_path}")
    print_success(f"  Created {CONFIG_FILE}")
    print_success(f"  Created {DEFAULT_DIR}/census.db")
