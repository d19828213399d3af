"""Cavity memory - desk-scale simulator for a long-lived cavity qubit.

This package models a transmon-coupled superconducting cavity in the
dispersive regime: Lindblad dynamics under driven interactions, cat-state
preparation and Wigner tomography, coherence experiments with their fits,
and the cavity loss budget.
"""

from pathlib import Path


__version__ = "0.1.0"
__author__ = "Cavity Memory Team"
__license__ = "MIT"

# Read version from VERSION file
_version_file = Path(__file__).parent / "VERSION"
if _version_file.exists():
    __version__ = _version_file.read_text().strip()


__all__ = [
    "__version__",
    "__author__",
    "__license__",
]
