"""Test Fixtures Package."""
