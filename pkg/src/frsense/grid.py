"""Grid-valued densities and their square-root representatives.

All continuous objects in this package live on a uniform grid over [0, 1] and
every integral is a trapezoidal sum on that grid.  A probability density is a
nonnegative grid function with unit trapezoidal integral; its square root is a
point on (the positive orthant of) the unit sphere of the same discretized
inner product, which is where the Fisher-Rao geometry of `geometry` operates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    AllZeroError,
    BaseMismatchError,
    GridMismatchError,
    NegativeValueError,
)

__all__ = [
    "Grid",
    "GridPdf",
    "Srd",
    "TangentVector",
    "DEFAULT_N_POINTS",
    "default_grid",
    "normalize_pdf",
    "to_srd",
    "from_srd",
    "tangent_project",
]

#: Grid resolution used throughout unless a caller asks for something else.
DEFAULT_N_POINTS = 512

#: Unit-integral and unit-norm constructions must hold to this tolerance.
INTEGRAL_TOL = 1e-8

#: Tangency (orthogonality to the base point) must hold to this tolerance.
ORTHO_TOL = 1e-6

_MIN_POINTS = 16


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, 1] with trapezoidal quadrature weights."""

    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        if self.n_points < _MIN_POINTS:
            raise ValueError(f"grid needs at least {_MIN_POINTS} points, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return 1.0 / (self.n_points - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = np.linspace(0.0, 1.0, self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights: h at interior points, h/2 at the endpoints."""
        w = np.full(self.n_points, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        w.flags.writeable = False
        return w

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoidal integral of a grid function (or of each row of a stack)."""
        return values @ self.weights

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """L2 inner product <f, g> under the trapezoid rule."""
        return (f * g) @ self.weights

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.inner(f, f)))


_DEFAULT_GRID = Grid(DEFAULT_N_POINTS)


def default_grid() -> Grid:
    """The shared 512-point grid instance."""
    return _DEFAULT_GRID


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"grid function must be 1-d, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


def _check_shape(grid: Grid, values: np.ndarray):
    if values.shape != (grid.n_points,):
        raise GridMismatchError(
            f"values of length {values.shape[0]} on a grid of {grid.n_points} points"
        )


def check_same_grid(a, b):
    """Raise GridMismatchError unless the two objects share a grid."""
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid.n_points} vs {b.grid.n_points} points")


@dataclass(frozen=True, eq=False)
class GridPdf:
    """Probability density on a grid: nonnegative, unit trapezoidal integral."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        _check_shape(self.grid, self.values)
        if np.any(self.values < 0.0):
            raise NegativeValueError("density values must be >= 0")
        total = self.grid.integrate(self.values)
        if abs(total - 1.0) > INTEGRAL_TOL:
            raise ValueError(f"density integrates to {total!r}, not 1")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


@dataclass(frozen=True, eq=False)
class Srd:
    """Square-root density: nonnegative grid function with unit squared integral.

    Points of this type sit on the positive orthant of the sphere
    ``{psi : integral(psi^2) = 1}`` and are the working representation for all
    Fisher-Rao computations.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        _check_shape(self.grid, self.values)
        if np.any(self.values < 0.0):
            raise NegativeValueError("square-root density values must be >= 0")
        sq = self.grid.integrate(self.values**2)
        if abs(sq - 1.0) > INTEGRAL_TOL:
            raise ValueError(f"squared integral is {sq!r}, not 1")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def allclose(self, other: "Srd", tol: float = 1e-12) -> bool:
        return self.grid == other.grid and bool(
            np.max(np.abs(self.values - other.values)) <= tol
        )


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Element of the tangent space at ``base``: orthogonal to it in L2."""

    base: Srd
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        _check_shape(self.base.grid, self.values)
        dot = self.base.grid.inner(self.values, self.base.values)
        if abs(dot) > ORTHO_TOL:
            raise BaseMismatchError(f"not tangent at base: <v, psi> = {dot!r}")

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def norm(self) -> float:
        return self.grid.norm(self.values)

    def scaled(self, c: float) -> "TangentVector":
        return TangentVector(self.base, c * self.values)


def normalize_pdf(grid: Grid, raw) -> GridPdf:
    """Normalize a nonnegative grid function to a unit-integral density.

    Parameters
    ----------
    grid : Grid
    raw : array_like
        Nonnegative values on ``grid``; need not integrate to 1.

    Raises
    ------
    NegativeValueError
        If any value is negative.
    AllZeroError
        If the function integrates to zero, so no density exists.
    """
    arr = np.asarray(raw, dtype=float)
    _check_shape(grid, arr)
    if np.any(arr < 0.0):
        raise NegativeValueError("cannot normalize a function with negative values")
    total = grid.integrate(arr)
    if total <= 0.0:
        raise AllZeroError("cannot normalize the zero function")
    return GridPdf(grid, arr / total)


def to_srd(pdf: GridPdf) -> Srd:
    """Square-root transform of a density, renormalized to the unit sphere.

    The pointwise square root of a unit-integral density already has unit
    squared integral in the continuum; the explicit renormalization here
    removes the residual quadrature error so downstream identities (log-map
    norms, geodesic lengths) hold to near machine precision.
    """
    root = np.sqrt(pdf.values)
    root = root / np.sqrt(pdf.grid.integrate(root**2))
    return Srd(pdf.grid, root)


def from_srd(psi: Srd) -> GridPdf:
    """Square an SRD back into a density."""
    p = psi.values**2
    return GridPdf(psi.grid, p / psi.grid.integrate(p))


def tangent_project(base: Srd, values) -> TangentVector:
    """Project a grid function onto the tangent space at ``base``.

    Subtracts the component along ``base`` so the result is exactly tangent;
    handy for building perturbation directions in tests and demos.
    """
    arr = np.asarray(values, dtype=float)
    _check_shape(base.grid, arr)
    arr = arr - base.grid.inner(arr, base.values) * base.values
    return TangentVector(base, arr)
