"""Configuration, device and result models."""
