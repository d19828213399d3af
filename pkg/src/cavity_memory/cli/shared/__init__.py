"""Console, shared options and error handling for CLI commands."""
