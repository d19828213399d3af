"""Pytest configuration and fixtures for cavity-memory tests."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from cavity_memory.models.device import SystemParams
from cavity_memory.services.hilbert import FockSpace


@pytest.fixture
def params() -> SystemParams:
    """Reference device parameters.

    Returns:
        SystemParams of the measured device
    """
    return SystemParams.table_one()


@pytest.fixture
def cavity_space() -> FockSpace:
    """Cavity-only space large enough for |alpha| = 2.

    Returns:
        FockSpace with 30 cavity levels
    """
    return FockSpace((30,), ("cavity",))


@pytest.fixture
def encoding_space() -> FockSpace:
    """Cavity (4) x transmon (3) space used by the sideband protocols.

    Returns:
        FockSpace with labels cavity, transmon
    """
    return FockSpace.cavity_transmon(4, 3)


@pytest.fixture
def budget_document() -> dict:
    """Run document with only a loss-budget experiment.

    Returns:
        Dictionary ready for RunConfig.from_dict
    """
    return {
        "name": "budget-test",
        "experiments": [{"protocol": "loss_budget"}],
    }


@pytest.fixture
def budget_config_file(tmp_path: Path, budget_document: dict) -> Path:
    """Write the loss-budget document to a JSON file.

    Args:
        tmp_path: Pytest temporary path fixture
        budget_document: Document to write

    Returns:
        Path to the JSON file
    """
    path = tmp_path / "budget.json"
    path.write_text(json.dumps(budget_document))
    return path
