"""Observables and their expectations along the viscous flow and in the limit.

Two families matter: multiplication by a bounded function, which keeps
seeing the full state in the limit, and finite-rank (compact)
observables, which lose sight of the mass swallowed by the wall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import BoundedFunction, WaveFunction, inner, norm
from .evolvers import EvolutionParams, spectral_evolve
from .limit_dynamics import ALPHA_FLOOR, comp_state_evolve, mult_expectation_limit

# Rank-one directions must be unit vectors to this tolerance.
UNIT_TOL = 1e-6


@dataclass(frozen=True)
class MultiplicationObservable:
    """Multiplication by a bounded sampled function."""

    f: BoundedFunction


@dataclass(frozen=True)
class FiniteRankObservable:
    """Real combination sum_k c_k P_k of rank-one projections.

    Directions must be unit vectors; they need not be orthogonal.
    """

    coeffs: tuple[float, ...]
    directions: tuple[WaveFunction, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != len(self.directions):
            raise ValidationError("one coefficient per direction required")
        if len(self.coeffs) == 0:
            raise ValidationError("finite-rank observable needs at least one term")
        for c in self.coeffs:
            if not (isinstance(c, (int, float)) and math.isfinite(c)):
                raise ValidationError(f"coefficients must be finite reals, got {c!r}")
        g = self.directions[0].grid
        for d in self.directions:
            if d.grid != g:
                raise ValidationError("directions live on different grids")
            n = norm(d)
            if abs(n - 1.0) > UNIT_TOL:
                raise ValidationError(f"directions must be unit vectors, norm is {n:.8f}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))


Observable = MultiplicationObservable | FiniteRankObservable


def expectation(u: WaveFunction, obs: Observable) -> float | complex:
    """Quadratic form <u, A u> of an observable on a state."""
    if isinstance(obs, MultiplicationObservable):
        f = obs.f
        if u.grid != f.grid:
            raise ValidationError("observable and state live on different grids")
        dens = u.values.real ** 2 + u.values.imag ** 2
        val = complex(u.grid.h * np.sum(f.values * dens))
        if np.all(f.values.imag == 0.0):
            return val.real
        return val
    if isinstance(obs, FiniteRankObservable):
        total = 0.0
        for c, d in zip(obs.coeffs, obs.directions):
            total += c * abs(inner(d, u)) ** 2
        return total
    raise ValidationError(f"unsupported observable type {type(obs).__name__}")


def regularized_expectation(
    phi: WaveFunction, obs: Observable, p: EvolutionParams
) -> float | complex:
    """Expectation along the viscous flow at viscosity epsilon."""
    return expectation(spectral_evolve(phi, p), obs)


def comp_expectation_limit(
    phi: WaveFunction, obs: FiniteRankObservable, b: float, t: float
) -> float:
    """Limiting expectation of a compact observable.

    Only the transported branch contributes; the singular weight is
    invisible to any finite-rank observable.  Multiplication
    observables must go through mult_expectation_limit instead, since
    their limit keeps both branches.
    """
    if not isinstance(obs, FiniteRankObservable):
        raise ValidationError(
            "comp_expectation_limit handles finite-rank observables only"
        )
    state = comp_state_evolve(phi, b, t)
    if state.shift_profile is None or state.alpha <= ALPHA_FLOOR:
        return 0.0
    val = expectation(state.shift_profile, obs)
    return state.alpha * float(np.real(val))


__all__ = [
    "MultiplicationObservable",
    "FiniteRankObservable",
    "Observable",
    "expectation",
    "regularized_expectation",
    "comp_expectation_limit",
    "mult_expectation_limit",
    "UNIT_TOL",
]
