"""Test suite for cavity-memory."""
