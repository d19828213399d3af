"""Shared fixtures for CLI tests."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner


@pytest.fixture
def cli_runner() -> CliRunner:
    """Provide Click test runner."""
    return CliRunner()


@pytest.fixture
def series_csv(tmp_path: Path) -> Path:
    """CSV of an exact exponential decay with tau = 2.

    Args:
        tmp_path: Pytest temporary path fixture

    Returns:
        Path to the CSV file
    """
    lines = ["delay_s,p_one"]
    for i in range(30):
        x = 0.25 * i
        lines.append(f"{x!r},{0.9 * 2.718281828459045 ** (-x / 2.0) + 0.05!r}")
    path = tmp_path / "decay.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def invalid_config_file(tmp_path: Path) -> Path:
    """Run document with an unknown device key.

    Args:
        tmp_path: Pytest temporary path fixture

    Returns:
        Path to the JSON file
    """
    path = tmp_path / "invalid.json"
    path.write_text(
        json.dumps({"device": {"chi_hz": 1.0}, "experiments": [{"protocol": "cooldowns"}]})
    )
    return path
