import numpy as np
import pytest

import curveflow as cf
from curveflow.energies import PhaseSepParams, default_nodal_model


@pytest.fixture(scope="session")
def circle_256():
    return cf.make_named_curve("circle", 256, radius=1.0)


@pytest.fixture(scope="session")
def trillium_256():
    return cf.make_named_curve("trillium", 256)


@pytest.fixture(scope="session")
def nodal():
    return default_nodal_model()


@pytest.fixture(scope="session")
def ps_params(trillium_256):
    return PhaseSepParams(epsilon=0.05, delta=0.2, beta=3.0, sigma1_len=1.8,
                          gamma0_length=cf.total_length(trillium_256))


def smooth_field(n, seed, modes=6, scale=1.0):
    """Deterministic band-limited test field."""
    rng = np.random.default_rng(seed)
    s = np.arange(n) / n
    out = np.zeros(n)
    for m in range(1, modes + 1):
        out += rng.normal() * np.cos(2 * np.pi * m * s) + rng.normal() * np.sin(2 * np.pi * m * s)
    return scale * out / modes


def fitted_order(hs, errs):
    """Least-squares convergence order from grid sizes and errors."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    return float(np.polyfit(np.log(hs), np.log(np.maximum(errs, 1e-300)), 1)[0])
