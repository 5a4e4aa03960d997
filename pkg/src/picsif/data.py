"""Locations of bundled data files (scenario sources and golden witnesses)."""

from __future__ import annotations

import os
from pathlib import Path

_HERE = Path(__file__).parent


def scenarios_dir() -> Path:
    return _HERE / "data" / "scenarios"


def golden_dir() -> Path:
    override = os.environ.get("PICSIF_GOLDEN_DIR")
    if override:
        return Path(override)
    return _HERE / "data" / "golden"


def scenario_path(name: str) -> Path:
    return scenarios_dir() / f"{name}.scif"


def golden_path(name: str) -> Path:
    return golden_dir() / name
