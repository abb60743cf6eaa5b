"""Command-Line Package."""
