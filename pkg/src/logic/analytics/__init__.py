"""Analytics Package."""
