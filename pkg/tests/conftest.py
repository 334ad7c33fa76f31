"""Shared fixtures for the test suite."""

from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def random_symmetric(p: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((p, p)) * scale
    return (a + a.T) / 2.0


def random_spd(p: int, rng: np.random.Generator, jitter: float = 0.5) -> np.ndarray:
    a = rng.standard_normal((p, p))
    return a @ a.T / p + jitter * np.eye(p)
