"""Experiment sequences built from the master-equation dynamics."""
