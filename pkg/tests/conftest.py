import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from senseflow import riverbank_dir
from senseflow.pipeline import ResourceTexts


@pytest.fixture(scope="session")
def riverbank() -> ResourceTexts:
    """Contents of the bundled five-word demonstration fixture."""
    d = riverbank_dir()

    def read(name):
        return (d / name).read_text(encoding="utf-8")

    return ResourceTexts(
        occurrences=read("occurrences.tsv"),
        inventory=read("inventory.tsv"),
        counts=read("pairs.tsv"),
        unigrams=read("unigrams.tsv"),
        glosses=read("glosses.tsv"),
        stopwords=read("stopwords.txt"),
        gold=read("gold.tsv"),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(8271)
