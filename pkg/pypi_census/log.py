"""Logger factory. Diagnostics render through rich on standard error."""

import logging

from rich.console import Console
from rich.logging import RichHandler

ROOT_LOGGER = "pypi_census"

stderr_console = Console(stderr=True)


def get_logger(name: str) -> logging.Logger:
    """Return a logger in the pypi_census namespace."""
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


def configure_logging(verbose: bool = False) -> None:
    """Install the stderr rich handler on the package root logger.

    Safe to call more than once; the handler is replaced, not stacked.
    """
    root = logging.getLogger(ROOT_LOGGER)
    for handler in list(root.handlers):
        if isinstance(handler, RichHandler):
            root.removeHandler(handler)

    handler = RichHandler(
        console=stderr_console,
        show_path=False,
        show_time=False,
        markup=False,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    root.propagate = False
