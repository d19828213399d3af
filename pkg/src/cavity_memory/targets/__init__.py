"""Reproduction target configurations (JSON package data)."""
