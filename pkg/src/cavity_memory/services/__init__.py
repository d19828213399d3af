"""Simulation, analysis and run services."""
