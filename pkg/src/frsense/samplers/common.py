"""Shared sampler infrastructure: data container, chain controls, outputs."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import EmptyDatasetError
from ..grid import Grid, GridPdf, Srd, normalize_pdf, to_srd

__all__ = [
    "MARGIN",
    "Dataset",
    "McmcControl",
    "PosteriorSample",
    "derived_seed",
    "make_rng",
    "sample_crp_partition",
    "crp_expected_clusters",
    "silverman_bandwidth",
]

#: Rescaled observations are kept this far inside [0, 1] on both sides.
MARGIN = 0.05


@dataclass(frozen=True)
class Dataset:
    """Observations in original units plus the affine map into [0, 1].

    ``(x - shift) / scale`` sends the observed range onto
    ``[MARGIN, 1 - MARGIN]``; samplers only ever see the rescaled values.
    """

    observations: np.ndarray = field(repr=False)
    shift: float
    scale: float
    name: str = ""

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        if obs.ndim != 1 or obs.size == 0:
            raise EmptyDatasetError("dataset needs at least one observation")
        obs = obs.copy()
        obs.flags.writeable = False
        object.__setattr__(self, "observations", obs)
        if not np.isfinite(obs).all():
            raise ValueError("observations must be finite")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        r = self.rescaled
        if r.min() < MARGIN - 1e-9 or r.max() > 1.0 - MARGIN + 1e-9:
            raise ValueError("rescaled observations leave the margin envelope")

    @classmethod
    def from_observations(cls, values, name: str = "") -> "Dataset":
        """Build a dataset whose range lands exactly on the margin envelope.

        Degenerate samples (all values equal) are centered at 1/2 with unit
        scale instead.
        """
        obs = np.asarray(values, dtype=float)
        if obs.ndim != 1 or obs.size == 0:
            raise EmptyDatasetError("dataset needs at least one observation")
        lo, hi = float(obs.min()), float(obs.max())
        if hi > lo:
            scale = (hi - lo) / (1.0 - 2.0 * MARGIN)
            shift = lo - MARGIN * scale
        else:
            scale = 1.0
            shift = lo - 0.5
        return cls(observations=obs, shift=shift, scale=scale, name=name)

    @property
    def n(self) -> int:
        return int(self.observations.size)

    @cached_property
    def rescaled(self) -> np.ndarray:
        r = (self.observations - self.shift) / self.scale
        r.flags.writeable = False
        return r


@dataclass(frozen=True)
class McmcControl:
    """Chain length bookkeeping shared by every sampler."""

    n_samples: int = 500
    burn_in: int = 1000
    thin: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 10:
            raise ValueError(f"n_samples must be >= 10, got {self.n_samples}")
        if self.burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.thin < 1:
            raise ValueError(f"thin must be >= 1, got {self.thin}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def n_sweeps(self) -> int:
        return self.burn_in + self.n_samples * self.thin


@dataclass(frozen=True)
class PosteriorSample:
    """Density draws emitted by one sampler run.

    ``trace`` holds one scalar series per monitored quantity (cluster count,
    sampled hyperparameters, ...) aligned with ``pdfs``; ``diagnostics`` holds
    whole-run scalars such as acceptance rates.
    """

    model: str
    pdfs: list[GridPdf]
    seed: int
    config: object = None
    trace: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.pdfs) == 0:
            raise EmptyDatasetError("posterior sample needs at least one draw")

    @property
    def n_draws(self) -> int:
        return len(self.pdfs)

    @property
    def grid(self) -> Grid:
        return self.pdfs[0].grid

    @cached_property
    def densities(self) -> np.ndarray:
        """All draws stacked into an (n_draws, n_points) matrix."""
        d = np.stack([p.values for p in self.pdfs])
        d.flags.writeable = False
        return d

    def srds(self) -> list[Srd]:
        return [to_srd(p) for p in self.pdfs]


_BASELINE_SLOT = 0xFFFFFFFF


def derived_seed(base_seed: int, replicate: int, value_index: int | None = None) -> int:
    """Deterministic per-task seed from the base seed and the task position.

    ``value_index=None`` addresses the replicate's baseline run.  Uses the
    documented SeedSequence hash so the mapping is stable across platforms.
    """
    slot = _BASELINE_SLOT if value_index is None else int(value_index)
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(replicate), slot))
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))


def sample_crp_partition(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """One draw of cluster labels from the Chinese restaurant process prior.

    Sequential seating: observation i starts a new cluster with probability
    alpha / (alpha + i) and otherwise joins an existing cluster with
    probability proportional to its size.
    """
    labels = np.zeros(n, dtype=np.int64)
    counts = [1]
    for i in range(1, n):
        u = rng.random() * (alpha + i)
        if u < alpha:
            labels[i] = len(counts)
            counts.append(1)
        else:
            acc = alpha
            for j, c in enumerate(counts):
                acc += c
                if u < acc:
                    labels[i] = j
                    counts[j] += 1
                    break
    return labels


def crp_expected_clusters(alpha: float, n: int) -> float:
    """Expected number of occupied clusters: sum of alpha / (alpha + i - 1)."""
    i = np.arange(1, n + 1, dtype=float)
    return float(np.sum(alpha / (alpha + i - 1.0)))


def silverman_bandwidth(values: np.ndarray, grid: Grid) -> float:
    """Rule-of-thumb kernel bandwidth, floored at twice the grid spacing."""
    n = values.size
    floor = 2.0 * grid.spacing
    if n < 2:
        return floor
    sd = float(np.std(values, ddof=1))
    return max(1.06 * sd * n ** (-0.2), floor)


def density_rows_to_pdfs(grid: Grid, rows: np.ndarray) -> list[GridPdf]:
    """Normalize raw density rows into GridPdf objects on a shared grid."""
    return [normalize_pdf(grid, row) for row in rows]
