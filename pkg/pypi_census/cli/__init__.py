"""Command-line interface for pypi-census."""
