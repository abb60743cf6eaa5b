"""Backend Tests Package."""
