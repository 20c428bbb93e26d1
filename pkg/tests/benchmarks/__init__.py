"""Performance benchmarks for the API."""
