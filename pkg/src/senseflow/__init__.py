"""Consistent word-sense labeling as an evolutionary game.

Words to disambiguate are players on a weighted co-occurrence graph; each
player's strategies are its candidate senses and payoffs come from sense
similarity. Discrete replicator dynamics drive the strategy mix of every
player to a consistent assignment.
"""

from importlib import resources as _resources
from pathlib import Path

__version__ = "0.1.0"


def riverbank_dir() -> Path:
    """Directory of the bundled five-word demonstration fixture."""
    return Path(str(_resources.files("senseflow") / "data" / "riverbank"))
