"""Utilities Package."""
