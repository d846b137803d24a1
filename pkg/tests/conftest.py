from __future__ import annotations

import numpy as np
import pytest

from frsense import Grid, GridPdf, Srd, default_grid, normalize_pdf, to_srd


def mixture_density(grid: Grid, means, sds, weights) -> GridPdf:
    """Gaussian mixture restricted to [0, 1] and renormalized on the grid."""
    x = grid.x
    raw = np.zeros_like(x)
    for m, s, w in zip(means, sds, weights):
        raw += w * np.exp(-0.5 * ((x - m) / s) ** 2) / (s * np.sqrt(2.0 * np.pi))
    return normalize_pdf(grid, raw)


def random_mixture_pdf(grid: Grid, rng: np.random.Generator, n_comp_max: int = 4) -> GridPdf:
    """Random smooth mixture density; component widths floored for overlap."""
    k = int(rng.integers(1, n_comp_max + 1))
    means = rng.uniform(0.1, 0.9, size=k)
    sds = rng.uniform(0.06, 0.25, size=k)
    weights = rng.dirichlet(np.ones(k))
    return mixture_density(grid, means, sds, weights)


def random_srd(grid: Grid, rng: np.random.Generator) -> Srd:
    return to_srd(random_mixture_pdf(grid, rng))


@pytest.fixture
def grid() -> Grid:
    return default_grid()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)
