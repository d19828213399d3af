"""Canned run configurations for the reproduction targets.

Each target is a JSON run document shipped in ``cavity_memory/targets``.
"""

from __future__ import annotations

import json
import logging
from importlib import resources

from cavity_memory.exceptions import UnknownTargetError
from cavity_memory.models.config import RunConfig


logger = logging.getLogger(__name__)

TARGET_PACKAGE = "cavity_memory.targets"


def list_targets() -> list[str]:
    """Names of every shipped target, sorted."""
    return sorted(
        entry.name.removesuffix(".json")
        for entry in resources.files(TARGET_PACKAGE).iterdir()
        if entry.name.endswith(".json")
    )


def load_target(name: str) -> RunConfig:
    """Validated configuration of one target.

    Raises:
        UnknownTargetError: If no target has that name
    """
    if name not in list_targets():
        raise UnknownTargetError(
            f"Unknown target '{name}'. Known targets: {', '.join(list_targets())}"
        )
    text = resources.files(TARGET_PACKAGE).joinpath(f"{name}.json").read_text()
    logger.debug("Loading target %s", name)
    return RunConfig.from_dict(json.loads(text))
