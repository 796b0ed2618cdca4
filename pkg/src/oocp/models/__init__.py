"""Bundled example models and instance files."""

from importlib import resources
from pathlib import Path


def model_dir() -> Path:
    """Directory holding the bundled ``.oocp`` models."""
    return Path(resources.files(__package__))


def model_path(name: str) -> Path:
    """Path of a bundled model, e.g. ``model_path("anbn.oocp")``."""
    return model_dir() / name


def instance_path(name: str) -> Path:
    """Path of a bundled instance file, e.g. ``instance_path("aaabbb.json")``."""
    return model_dir() / "instances" / name
