"""Data Models Package."""
