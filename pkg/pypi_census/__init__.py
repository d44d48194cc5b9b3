"""pypi-census - Import, license and growth statistics for a Python package registry."""

__version__ = "0.1.0"
