"""Example input files shipped with the package."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

_FILES = {
    "paper-sec8-plant": "paper-sec8-plant.json",
    "boolean-mn1": "boolean-mn1.json",
    "lqr-scalar": "lqr-scalar.json",
    "game-2p-scalar": "game-2p-scalar.json",
}


def bundled_examples() -> list[str]:
    return sorted(_FILES)


def bundled_path(name: str) -> Path:
    if name not in _FILES:
        raise KeyError(f"no bundled example {name!r}; available: {', '.join(bundled_examples())}")
    return Path(str(resources.files("stpgame").joinpath("data", _FILES[name])))


def resolve_input(path_or_name: str) -> Path:
    """A filesystem path, or the name of a bundled example."""
    p = Path(path_or_name)
    if p.exists() or path_or_name not in _FILES:
        return p
    return bundled_path(path_or_name)
