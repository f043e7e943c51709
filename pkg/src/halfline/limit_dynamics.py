"""Limit dynamics after the viscosity is gone: branches, states, stopping.

Everything here describes the b > 0 inflow regime, where transport
drains mass through the wall.  The strong limit is the contraction
V(t) u = u(x + b t); what the contraction loses is recovered either by
a second explicit branch (the reflected wave, up to a phase that never
converges) or, at the level of states on compact observables, by a
singular component that no compact observable can see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import (
    BoundedFunction,
    Grid,
    WaveFunction,
    indicator_project,
    inner,
    norm,
    reflect_sample,
    shift_sample,
)

# Inputs to the branch map must be unit vectors to this tolerance.
INPUT_NORM_TOL = 1e-6

# Below this surviving mass the transported branch has no direction
# left to normalize and the state is treated as wholly singular.
ALPHA_FLOOR = 1e-12

# Cumulative-mass threshold defining the numerical support edge.
MASS_FLOOR = 1e-12


def _check_regime(b: float, t: float) -> None:
    if not (math.isfinite(b) and b > 0):
        raise ValidationError(f"inflow regime requires b > 0, got {b!r}")
    if not (math.isfinite(t) and t >= 0):
        raise ValidationError(f"time t must be nonnegative, got {t!r}")


def shift_V(phi: WaveFunction, b: float, t: float) -> WaveFunction:
    """Transport branch: (V(t) u)(x) = u(x + b t), a contraction."""
    _check_regime(b, t)
    return shift_sample(phi, b * t)


def reflect_W(phi: WaveFunction, b: float, t: float) -> WaveFunction:
    """Reflected branch: (W(t) u)(x) = u(b t - x), supported on [0, b t]."""
    _check_regime(b, t)
    return indicator_project(reflect_sample(phi, b * t), 0.0, b * t)


@dataclass(frozen=True)
class KrausBranchState:
    """Both branches of the limit channel applied to one unit vector."""

    shift_branch: WaveFunction
    reflect_branch: WaveFunction
    p_shift: float
    p_reflect: float
    completeness_defect: float


def kraus_apply(phi: WaveFunction, b: float, t: float) -> KrausBranchState:
    """Apply both branches and account for the mass split.

    The two branch masses must sum to one: the reflected branch is an
    exact isometric copy of whatever the transport branch dropped.
    Requires unit input, since the mass bookkeeping is meaningless
    otherwise.
    """
    _check_regime(b, t)
    n = norm(phi)
    if abs(n - 1.0) > INPUT_NORM_TOL:
        raise ValidationError(f"kraus_apply needs a unit vector, norm is {n:.8f}")
    v = shift_V(phi, b, t)
    w = reflect_W(phi, b, t)
    pv = norm(v) ** 2
    pw = norm(w) ** 2
    return KrausBranchState(
        shift_branch=v,
        reflect_branch=w,
        p_shift=pv,
        p_reflect=pw,
        completeness_defect=abs(pv + pw - 1.0),
    )


def mult_expectation_limit(
    phi: WaveFunction, f: BoundedFunction, b: float, t: float
) -> float | complex:
    """Limit of multiplication-observable expectations at time t.

    Both branches contribute their own density; the phase riding on
    the reflected wave cancels against its conjugate, so the limit
    sees plain densities and no interference term.
    """
    _check_regime(b, t)
    if phi.grid != f.grid:
        raise ValidationError("observable and state live on different grids")
    v = shift_V(phi, b, t).values
    w = reflect_W(phi, b, t).values
    density = v.real ** 2 + v.imag ** 2 + w.real ** 2 + w.imag ** 2
    val = complex(phi.grid.h * np.sum(f.values * density))
    if np.all(f.values.imag == 0.0):
        return val.real
    return val


@dataclass(frozen=True)
class CompAlgebraState:
    """State on compact observables: a weighted pure part plus a
    singular remainder.

    The singular weight is exactly 1 - alpha by construction.  Below
    ALPHA_FLOOR there is no transported direction left and the profile
    is None.
    """

    alpha: float
    singular_weight: float
    shift_profile: WaveFunction | None
    b: float
    t: float


def comp_state_evolve(phi: WaveFunction, b: float, t: float) -> CompAlgebraState:
    """Evolve a unit vector to its limiting state on compact observables."""
    _check_regime(b, t)
    n = norm(phi)
    if abs(n - 1.0) > INPUT_NORM_TOL:
        raise ValidationError(f"comp_state_evolve needs a unit vector, norm is {n:.8f}")
    v = shift_V(phi, b, t)
    alpha = min(max(norm(v) ** 2, 0.0), 1.0)
    if alpha <= ALPHA_FLOOR:
        profile = None
    else:
        profile = WaveFunction(phi.grid, v.values / math.sqrt(alpha))
    return CompAlgebraState(
        alpha=alpha,
        singular_weight=1.0 - alpha,
        shift_profile=profile,
        b=b,
        t=t,
    )


def destruction_time(phi: WaveFunction, b: float) -> float:
    """First time the transported state starts losing mass.

    Numerically: the first node where the cumulative mass of phi
    exceeds MASS_FLOOR, divided by b.
    """
    if not (math.isfinite(b) and b > 0):
        raise ValidationError(f"inflow regime requires b > 0, got {b!r}")
    dens = phi.values.real ** 2 + phi.values.imag ** 2
    cum = phi.grid.h * np.cumsum(dens)
    idx = np.nonzero(cum > MASS_FLOOR)[0]
    if idx.size == 0:
        raise ValidationError("state carries no mass above MASS_FLOOR")
    return float(phi.grid.x[idx[0]]) / b


@dataclass(frozen=True)
class WoldProjectors:
    """Orthogonal split of the half line at the moving cut b t.

    The upper band [b t, L] is the range of the adjoint shift at time
    t; the lower band [0, b t] is what the channel has already filled.
    Both bands are closed, so a node sitting exactly on the cut
    belongs to both projections.
    """

    grid: Grid
    b: float
    t: float
    cut: float

    def upper(self, u: WaveFunction) -> WaveFunction:
        return indicator_project(u, self.cut, self.grid.L)

    def lower(self, u: WaveFunction) -> WaveFunction:
        return indicator_project(u, 0.0, self.cut)


def wold_projectors(grid: Grid, b: float, t: float) -> WoldProjectors:
    _check_regime(b, t)
    return WoldProjectors(grid=grid, b=b, t=t, cut=b * t)


def comp_semigroup_check(phi: WaveFunction, b: float, t: float, tau: float) -> float:
    """Defect of the state flow composition property.

    Evolves to t, restarts from the normalized transported profile for
    another tau, and compares the surviving mass with the direct
    evolution to t + tau.  Zero by definition when either leg is
    empty.  The branch maps themselves do not compose (reapplying the
    reflected branch is a projection, not a longer reflection); the
    composition law holds only at the level of states, which is what
    this measures.
    """
    _check_regime(b, t)
    if not (math.isfinite(tau) and tau >= 0):
        raise ValidationError(f"time tau must be nonnegative, got {tau!r}")
    if t == 0.0 or tau == 0.0:
        return 0.0
    direct = comp_state_evolve(phi, b, t + tau).alpha
    first = comp_state_evolve(phi, b, t)
    if first.shift_profile is None:
        return abs(direct)
    second = comp_state_evolve(first.shift_profile, b, tau)
    return abs(first.alpha * second.alpha - direct)
