"""Card-based zero-knowledge proof library: engine, primitives, puzzle protocols and harness."""
