"""Midpoint grids on [0, L] and the discrete Hilbert space built on them.

The half line is truncated to [0, L] and discretized at cell midpoints
x_j = (j + 1/2) h with h = L / N.  All inner products are midpoint
quadrature, so every operation here is exact linear algebra on C^N and
the continuum limit enters only through sampling and interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ValidationError

# Relative boundary trace below which sampled data counts as satisfying
# the u(0) = 0 condition.  Closed-form inputs sit at machine zero; the
# looser gates used by the evolution engines live in evolvers.py.
BOUNDARY_TOL = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform midpoint grid on [0, L] with N cells.

    Attributes
    ----------
    L : float
        Length of the computational interval.
    N : int
        Number of cells.  Must be a power of two, at least 8, so the
        spectral engine can extend to a 2N-point transform.
    h : float
        Cell width L / N, derived.
    x : numpy.ndarray
        Midpoint coordinates, shape (N,).
    """

    L: float
    N: int
    h: float = field(init=False, repr=False)
    x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 8):
            raise ValidationError(f"N must be an integer >= 8, got {self.N!r}")
        if self.N & (self.N - 1) != 0:
            raise ValidationError(f"N must be a power of two, got {self.N}")
        if not (isinstance(self.L, (int, float)) and math.isfinite(self.L) and self.L > 0):
            raise ValidationError(f"L must be a positive finite number, got {self.L!r}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "h", self.L / self.N)
        x = (np.arange(self.N, dtype=np.float64) + 0.5) * self.h
        x.setflags(write=False)
        object.__setattr__(self, "x", x)


def make_grid(L: float, N: int) -> Grid:
    """Build a midpoint grid, validating L > 0 and N a power of two >= 8."""
    return Grid(L=L, N=N)


@dataclass
class WaveFunction:
    """Complex amplitudes sampled on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.N,):
            raise ValidationError(
                f"values shape {v.shape} does not match grid with N={self.grid.N}"
            )
        if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
            raise ValidationError("values must be finite")
        self.values = v.copy()

    @classmethod
    def from_callable(cls, grid: Grid, f: Callable[[np.ndarray], np.ndarray]) -> "WaveFunction":
        return cls(grid, np.asarray(f(grid.x), dtype=np.complex128))


@dataclass
class BoundedFunction:
    """Real or complex bounded multiplier sampled on a grid.

    The stated bound must dominate the samples; it stands in for the
    essential sup of the underlying function and is what expectation
    bounds are checked against.
    """

    grid: Grid
    values: np.ndarray
    bound: float

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.N,):
            raise ValidationError(
                f"values shape {v.shape} does not match grid with N={self.grid.N}"
            )
        if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
            raise ValidationError("values must be finite")
        if not (math.isfinite(self.bound) and self.bound >= 0):
            raise ValidationError(f"bound must be finite and nonnegative, got {self.bound!r}")
        peak = float(np.max(np.abs(v))) if v.size else 0.0
        if peak > self.bound * (1.0 + 1e-12) + 1e-300:
            raise ValidationError(
                f"samples reach {peak:.3e}, above the stated bound {self.bound:.3e}"
            )
        self.values = v.copy()
        self.bound = float(self.bound)

    @classmethod
    def from_callable(
        cls,
        grid: Grid,
        f: Callable[[np.ndarray], np.ndarray],
        bound: float | None = None,
    ) -> "BoundedFunction":
        v = np.asarray(f(grid.x), dtype=np.complex128)
        if bound is None:
            bound = float(np.max(np.abs(v))) if v.size else 0.0
        return cls(grid, v, bound)


def _same_grid(u: WaveFunction, v: WaveFunction) -> Grid:
    if u.grid != v.grid:
        raise ValidationError("operands live on different grids")
    return u.grid


def inner(u: WaveFunction, v: WaveFunction) -> complex:
    """Midpoint quadrature inner product, conjugate-linear in the first slot."""
    g = _same_grid(u, v)
    return complex(g.h * np.vdot(u.values, v.values))


def norm(u: WaveFunction) -> float:
    return math.sqrt(max(float(np.real(inner(u, u))), 0.0))


def sample_at(u: WaveFunction, pos: np.ndarray) -> np.ndarray:
    """Evaluate u at arbitrary positions by piecewise-linear interpolation.

    Between the first and last midpoints the rule is ordinary linear
    interpolation.  On the half cells [0, x_0) and (x_{N-1}, L] the
    nearest segment is extended linearly, because zero-filling there
    would poison reflected data near the wall.  Outside [0, L] the
    function is zero by convention.
    """
    g = u.grid
    pos = np.asarray(pos, dtype=np.float64)
    q = pos / g.h - 0.5
    k = np.clip(np.floor(q).astype(np.int64), 0, g.N - 2)
    d = q - k
    out = (1.0 - d) * u.values[k] + d * u.values[k + 1]
    inside = (pos >= 0.0) & (pos <= g.L)
    return np.where(inside, out, 0.0 + 0.0j)


def shift_sample(u: WaveFunction, s: float) -> WaveFunction:
    """Sample x -> u(x + s), with zero inflow from beyond the domain.

    s = 0 reproduces u exactly, with no interpolation roundoff.
    """
    if not math.isfinite(s):
        raise ValidationError(f"shift must be finite, got {s!r}")
    if s == 0.0:
        return WaveFunction(u.grid, u.values)
    return WaveFunction(u.grid, sample_at(u, u.grid.x + s))


def reflect_sample(u: WaveFunction, c: float) -> WaveFunction:
    """Sample x -> u(c - x), the mirror image of u about c/2."""
    if not math.isfinite(c):
        raise ValidationError(f"reflection offset must be finite, got {c!r}")
    return WaveFunction(u.grid, sample_at(u, c - u.grid.x))


def indicator_project(u: WaveFunction, a: float, b: float) -> WaveFunction:
    """Multiply by the indicator of the closed band [a, b] intersected with the grid."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValidationError("band endpoints must be finite")
    if a > b:
        raise ValidationError(f"band endpoints out of order: a={a} > b={b}")
    mask = (u.grid.x >= a) & (u.grid.x <= b)
    return WaveFunction(u.grid, np.where(mask, u.values, 0.0 + 0.0j))


def boundary_value(u: WaveFunction) -> complex:
    """Quadratic extrapolation of the first three midpoint samples to x = 0."""
    v = u.values
    return complex(1.875 * v[0] - 1.25 * v[1] + 0.375 * v[2])


def boundary_defect(u: WaveFunction) -> float:
    """Extrapolated boundary amplitude relative to the peak amplitude.

    Zero for the zero function.  Functions vanishing linearly at the
    wall score O(h^3) here, so the check separates genuinely pinned
    data from data with an O(1) trace.
    """
    peak = float(np.max(np.abs(u.values)))
    if peak == 0.0:
        return 0.0
    return abs(boundary_value(u)) / peak


def is_boundary_compatible(u: WaveFunction, tol: float = BOUNDARY_TOL) -> bool:
    return boundary_defect(u) <= tol
