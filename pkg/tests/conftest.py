"""Shared fixtures: the 100 km reference line and a few small section sets."""
import os
import sys

_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, _ROOT)

import numpy as np
import pytest

from line_model import section_params
from schemas import LineParams, SectionParams


@pytest.fixture
def reference_line() -> LineParams:
    """100 km, 0.02 ohm/km, 0.5 mH/km, 0.4 uF/km, lossless shunt, 60 sections."""
    return LineParams(
        r_per_km=0.02,
        l_per_km=5e-4,
        c_per_km=4e-7,
        g_per_km=0.0,
        length_km=100.0,
        n_sections=60,
    )


@pytest.fixture
def sections60(reference_line) -> SectionParams:
    return section_params(reference_line)


@pytest.fixture
def sections9(reference_line) -> SectionParams:
    return section_params(reference_line.model_copy(update={"n_sections": 9}))


@pytest.fixture
def unit_section() -> SectionParams:
    return SectionParams(R=1.0, L=1.0, C=1.0, G=0.0, n=1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)

