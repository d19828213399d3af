"""CLI test suite for cavity-memory."""
