"""Test suite for pypi-census."""
