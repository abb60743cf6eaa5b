"""Data Ingestion Package."""
