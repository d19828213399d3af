"""Fits and closed-form models."""
