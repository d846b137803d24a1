"""Fisher-Rao geometry of densities via their square-root representatives.

Under the square-root map a density becomes a unit vector psi with psi >= 0,
and the Fisher-Rao metric becomes the round sphere metric, so every geometric
quantity here has a closed form on the sphere:

* distance          acos <psi1, psi2>
* exponential map   cos(|v|) psi + sin(|v|) v / |v|
* inverse exp map   (u / sin u) (psi2 - cos(u) psi1)   with u the distance

Intrinsic means are computed by gradient descent on the sum of squared
distances (tangent averaging), and principal modes of a sample come from the
eigendecomposition of the tangent covariance with quadrature-weight scaling,
so eigenvalues approximate those of the continuum covariance operator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AntipodalOrBoundaryError,
    BaseMismatchError,
    EmptyInputError,
    FrsenseError,
    GridMismatchError,
    InsufficientSamplesError,
)
from .grid import Grid, GridPdf, Srd, TangentVector, check_same_grid, from_srd, to_srd

__all__ = [
    "fr_distance",
    "exp_map",
    "inv_exp_map",
    "geodesic_path",
    "karcher_mean",
    "karcher_variance",
    "tangent_pca",
    "KarcherInfo",
    "TpcaResult",
]

#: Tangent norms below this take the small-angle branch (exp is the identity).
SMALL_ANGLE = 1e-12

#: Log maps are refused within this margin of the orthant boundary at pi/2.
BOUNDARY_MARGIN = 1e-9


def _as_srd(obj) -> Srd:
    if isinstance(obj, Srd):
        return obj
    if isinstance(obj, GridPdf):
        return to_srd(obj)
    raise TypeError(f"expected GridPdf or Srd, got {type(obj).__name__}")


def _angle_from_chord(chord_sq) -> np.ndarray:
    """Great-circle angle from the squared chord length |psi1 - psi2|^2.

    Equivalent to acos of the inner product but numerically exact at zero
    separation (bit-identical inputs give angle 0.0, not ~1e-8), which keeps
    degenerate sensitivity comparisons exactly zero.
    """
    half = 0.5 * np.sqrt(np.clip(chord_sq, 0.0, 4.0))
    return 2.0 * np.arcsin(np.clip(half, 0.0, 1.0))


def fr_distance(p1, p2) -> float:
    """Fisher-Rao distance between two densities (or their SRDs).

    Always lies in [0, pi/2] because square-root densities sit in the
    nonnegative orthant of the unit sphere.
    """
    psi1, psi2 = _as_srd(p1), _as_srd(p2)
    check_same_grid(psi1, psi2)
    diff = psi1.values - psi2.values
    return float(_angle_from_chord(psi1.grid.inner(diff, diff)))


def _exp_values(grid: Grid, base: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sphere exponential on raw arrays, clamped back into the orthant."""
    theta = grid.norm(v)
    if theta < SMALL_ANGLE:
        return base.copy()
    out = np.cos(theta) * base + (np.sin(theta) / theta) * v
    np.clip(out, 0.0, None, out=out)
    return out / grid.norm(out)


def exp_map(psi: Srd, dpsi: TangentVector) -> Srd:
    """Shoot a geodesic from ``psi`` along ``dpsi`` for time one.

    The raw sphere exponential can leave the nonnegative orthant; negative
    values are clamped to zero and the result renormalized, which keeps the
    output a valid SRD at the cost of exactness for large tangent norms.

    Raises
    ------
    BaseMismatchError
        If ``dpsi`` is anchored at a different point than ``psi``.
    """
    if dpsi.base is not psi and not (
        dpsi.base.grid == psi.grid and np.array_equal(dpsi.base.values, psi.values)
    ):
        raise BaseMismatchError("tangent vector is anchored at a different SRD")
    return Srd(psi.grid, _exp_values(psi.grid, psi.values, dpsi.values))


def inv_exp_map(psi1: Srd, psi2: Srd) -> TangentVector:
    """Tangent vector at ``psi1`` whose exponential reaches ``psi2``.

    The returned vector has norm equal to ``fr_distance(psi1, psi2)`` and is
    orthogonal to ``psi1``.

    Raises
    ------
    GridMismatchError
        If the two SRDs live on different grids.
    AntipodalOrBoundaryError
        If the points are a quarter circle (or more) apart, where the log map
        of the orthant stops being well defined.
    """
    check_same_grid(psi1, psi2)
    grid = psi1.grid
    dot = float(np.clip(grid.inner(psi1.values, psi2.values), -1.0, 1.0))
    diff = psi1.values - psi2.values
    u = float(_angle_from_chord(grid.inner(diff, diff)))
    if u >= np.pi / 2.0 - BOUNDARY_MARGIN:
        raise AntipodalOrBoundaryError(f"points are {u:.6f} apart, log map undefined")
    if u < SMALL_ANGLE:
        return TangentVector(psi1, np.zeros(grid.n_points))
    v = (u / np.sin(u)) * (psi2.values - dot * psi1.values)
    return TangentVector(psi1, v)


def geodesic_path(p1: GridPdf, p2: GridPdf, n_steps: int) -> list[GridPdf]:
    """Densities along the Fisher-Rao geodesic from ``p1`` to ``p2``.

    Returns ``n_steps`` equally spaced points including both endpoints, so
    consecutive points are ``fr_distance(p1, p2) / (n_steps - 1)`` apart.
    """
    if n_steps < 2:
        raise ValueError(f"n_steps must be >= 2, got {n_steps}")
    psi1 = _as_srd(p1)
    psi2 = _as_srd(p2)
    v = inv_exp_map(psi1, psi2)
    path = []
    for t in np.linspace(0.0, 1.0, n_steps):
        vals = _exp_values(psi1.grid, psi1.values, t * v.values)
        path.append(from_srd(Srd(psi1.grid, vals)))
    return path


@dataclass(frozen=True)
class KarcherInfo:
    """Convergence report for the intrinsic mean iteration."""

    converged: bool
    n_iter: int
    grad_norm: float


def _stack(samples: Sequence[Srd]) -> tuple[Grid, np.ndarray]:
    if len(samples) == 0:
        raise EmptyInputError("need at least one SRD")
    srds = [_as_srd(s) for s in samples]
    grid = srds[0].grid
    for s in srds[1:]:
        if s.grid != grid:
            raise GridMismatchError("SRDs live on different grids")
    stacked = np.stack([s.values for s in srds])
    # Canonical row order: every consumer (mean, variance, tangent PCA) is a
    # symmetric function of the sample, and sorting makes that exact in
    # floating point, not just in theory.
    return grid, stacked[np.lexsort(stacked.T[::-1])]


def _log_rows(grid: Grid, base: np.ndarray, stacked: np.ndarray):
    """Inverse exp map of every row of ``stacked`` at ``base``, vectorized.

    Returns the tangent matrix and the vector of distances.
    """
    cosines = np.clip(stacked @ (grid.weights * base), -1.0, 1.0)
    diff = stacked - base
    u = _angle_from_chord((diff**2) @ grid.weights)
    if np.any(u >= np.pi / 2.0 - BOUNDARY_MARGIN):
        raise AntipodalOrBoundaryError("a sample point is a quarter circle from the base")
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(u < SMALL_ANGLE, 1.0, u / np.sin(u))
    return factor[:, None] * (stacked - cosines[:, None] * base), u


def karcher_mean(
    samples: Sequence[Srd],
    eps1: float = 1e-6,
    eps2: float = 0.5,
    max_iter: int = 200,
    full_output: bool = False,
):
    """Intrinsic (Karcher) mean of a collection of SRDs.

    Gradient descent on the Frechet functional: average the log maps of all
    samples at the current estimate, step along that average scaled by
    ``eps2``, stop once the average's norm drops below ``eps1``.  The
    iteration starts from the normalized extrinsic average.

    Parameters
    ----------
    samples : sequence of Srd
    eps1 : float
        Gradient-norm stopping tolerance.
    eps2 : float
        Step size applied to the tangent average.
    max_iter : int
        Update budget; if exhausted, the best iterate seen (smallest gradient
        norm) is returned and flagged.
    full_output : bool
        When true, return ``(mean, KarcherInfo)``; otherwise return the mean
        alone and warn if the iteration did not converge.

    Raises
    ------
    EmptyInputError
        If ``samples`` is empty.
    """
    grid, stacked = _stack(samples)
    vals = stacked.mean(axis=0)
    vals = vals / grid.norm(vals)

    best_gnorm = np.inf
    best_vals = vals
    converged = False
    n_iter = 0
    for n_iter in range(max_iter + 1):
        tangents, _ = _log_rows(grid, vals, stacked)
        dbar = tangents.mean(axis=0)
        gnorm = grid.norm(dbar)
        if gnorm < best_gnorm:
            best_gnorm = gnorm
            best_vals = vals
        if gnorm < eps1:
            converged = True
            break
        if n_iter == max_iter:
            break
        vals = _exp_values(grid, vals, eps2 * dbar)

    mean = Srd(grid, best_vals)
    info = KarcherInfo(converged=converged, n_iter=n_iter, grad_norm=float(best_gnorm))
    if full_output:
        return mean, info
    if not converged:
        warnings.warn(
            f"intrinsic mean not converged after {max_iter} iterations "
            f"(gradient norm {best_gnorm:.3e})",
            RuntimeWarning,
        )
    return mean


def karcher_variance(samples: Sequence[Srd], mean: Srd) -> float:
    """Average squared Fisher-Rao distance of ``samples`` from ``mean``."""
    grid, stacked = _stack(samples)
    check_same_grid(samples[0], mean)
    diff = stacked - mean.values
    u = _angle_from_chord((diff**2) @ grid.weights)
    return float(np.mean(u**2))


@dataclass(frozen=True)
class TpcaResult:
    """Tangent principal component analysis of an SRD sample.

    ``eigenvalues`` are sorted nonincreasing and scaled so they approximate
    the continuum covariance operator's spectrum; ``eigenvectors`` holds one
    grid eigenfunction per column, orthonormal under the trapezoidal inner
    product.  Each eigenfunction's sign is fixed so its largest-magnitude
    entry is positive (earliest such entry on ties).
    """

    mean: Srd
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    n_samples: int

    @property
    def grid(self) -> Grid:
        return self.mean.grid

    def component(self, j: int) -> TangentVector:
        """The j-th principal direction as a tangent vector at the mean."""
        return TangentVector(self.mean, self.eigenvectors[:, j])


def tangent_pca(
    samples: Sequence[Srd],
    eps1: float = 1e-6,
    eps2: float = 0.5,
    max_iter: int = 200,
) -> TpcaResult:
    """Principal modes of variation of a sample of SRDs.

    Computes the intrinsic mean, lifts every sample to the tangent space at
    that mean, and eigendecomposes the sample covariance there.  The
    covariance is conjugated by the square roots of the quadrature weights
    before the (symmetric) eigendecomposition, which is what makes the
    eigenvalues quadrature-consistent and the eigenvectors orthonormal in the
    trapezoidal inner product.
    """
    if len(samples) < 2:
        raise InsufficientSamplesError("tangent PCA needs at least two SRDs")
    mean, info = karcher_mean(samples, eps1, eps2, max_iter, full_output=True)
    if not info.converged:
        warnings.warn(
            f"intrinsic mean not converged (gradient norm {info.grad_norm:.3e}); "
            "principal modes may be unreliable",
            RuntimeWarning,
        )
    grid, stacked = _stack(samples)
    tangents, _ = _log_rows(grid, mean.values, stacked)

    sqrt_w = np.sqrt(grid.weights)
    scaled = tangents * sqrt_w[None, :]
    cov = (scaled.T @ scaled) / (len(samples) - 1)
    evals, evecs = np.linalg.eigh(cov)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    if evals[-1] < -1e-10:
        raise FrsenseError(f"covariance produced eigenvalue {evals[-1]:.3e} < -1e-10")
    evals = np.clip(evals, 0.0, None)

    funcs = evecs / sqrt_w[:, None]
    flip = funcs[np.argmax(np.abs(funcs), axis=0), np.arange(funcs.shape[1])] < 0
    funcs[:, flip] *= -1.0
    return TpcaResult(mean=mean, eigenvalues=evals, eigenvectors=funcs, n_samples=len(samples))
