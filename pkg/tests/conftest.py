import numpy as np
import pytest

from ebtools import ZVector


def build_tail_heavy_zvector(n_total=6033, n_tail=49, tail_lo=3.0, tail_hi=5.29, seed=7):
    """A z-vector with exactly n_tail values at/above tail_lo (minimum exactly
    tail_lo) and the rest strictly inside (-2.9, 2.9)."""
    rng = np.random.default_rng(seed)
    bulk = rng.normal(0.0, 1.0, n_total - n_tail)
    bulk = np.clip(bulk, -2.89, 2.89)
    tail = np.linspace(tail_lo, tail_hi, n_tail)
    z = np.concatenate([bulk, tail])
    return ZVector(z=z, labels=[f"g{i + 1}" for i in range(n_total)])


@pytest.fixture
def prostate_like():
    return build_tail_heavy_zvector()
