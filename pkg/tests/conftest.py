"""Shared test helpers."""

from pathlib import Path

import numpy as np
import pytest

from ccid import ImagePlane

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_DIR = REPO_ROOT / "fixtures" / "std"
TEXTURE_DIR = REPO_ROOT / "fixtures" / "textures"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_plane(rng: np.random.Generator, height: int, width: int) -> ImagePlane:
    return ImagePlane(rng.random((height, width)) * 255.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240817)
