"""Convergence sweeps over viscosity ladders, with deterministic reports.

Each sweep fixes a grid, a preset, and a drift, then walks a strictly
decreasing viscosity ladder and records one scalar metric per rung.
Reports are a flat CSV (one row per record) plus a JSON verdict file;
both are byte-identical across reruns of the same configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ResolutionError, ValidationError
from .evolvers import (
    EvolutionParams,
    limit_group_V,
    remainder_norm,
    resolution_report,
    spectral_evolve,
)
from .grid import (
    BoundedFunction,
    Grid,
    WaveFunction,
    indicator_project,
    inner,
    make_grid,
    norm,
)
from .limit_dynamics import comp_state_evolve, mult_expectation_limit
from .observables import (
    FiniteRankObservable,
    MultiplicationObservable,
    comp_expectation_limit,
    expectation,
)
from .presets import get_preset

# Mass allowed within reach of the far wall over the whole sweep.
TAIL_GATE = 1e-10

# The divergence probe needs a visible absorbed branch to act on.
PROBE_MIN_ABSORBED = 0.05

# Defect directions closer than this to the span of earlier ones are
# dropped rather than normalized into noise.
GS_DROP_TOL = 1e-6

PROBE_RUNGS = 4

CSV_HEADER = "preset,b,t,epsilon,metric,value,ratio"

CLAIMS = ("thm1", "weak", "thm3", "thm5", "prop2", "thm2")


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a grid, a preset, a drift, times, and a viscosity ladder."""

    preset: str
    L: float
    N: int
    b: float
    times: tuple[float, ...]
    eps: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        if not (math.isfinite(self.b) and self.b != 0):
            raise ValidationError(f"drift b must be finite and nonzero, got {self.b!r}")
        if len(self.times) == 0:
            raise ValidationError("at least one time is required")
        for t in self.times:
            if not (math.isfinite(t) and t > 0):
                raise ValidationError(f"sweep times must be positive, got {t!r}")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValidationError(f"times must be strictly increasing, got {self.times}")
        if len(self.eps) == 0:
            raise ValidationError("the viscosity ladder must be nonempty")
        for e in self.eps:
            if not (math.isfinite(e) and e > 0):
                raise ValidationError(f"viscosities must be positive, got {e!r}")
        if any(b >= a for a, b in zip(self.eps, self.eps[1:])):
            raise ValidationError(
                f"the viscosity ladder must be strictly decreasing, got {self.eps}"
            )


@dataclass
class ConvergenceRecord:
    """One measured scalar at one ladder rung."""

    preset: str
    b: float
    t: float
    epsilon: float
    metric: str
    value: float
    ratio: float | None = None


def _prepare(cfg: SweepConfig) -> tuple[Grid, WaveFunction]:
    """Build the grid and preset, refusing configurations the grid cannot carry."""
    grid = make_grid(cfg.L, cfg.N)
    phi = get_preset(cfg.preset, grid)
    for e in cfg.eps:
        rep = resolution_report(grid, e, cfg.b)
        if not rep.admissible:
            raise ResolutionError(
                f"ladder rung epsilon={e:g} is underresolved on this grid "
                f"({rep.points_per_wavelength:.2f} points per wavelength)"
            )
    reach = grid.L - abs(cfg.b) * max(cfg.times)
    if reach <= 0:
        raise ValidationError(
            f"horizon {max(cfg.times):g} sweeps past the far wall at L={grid.L:g}"
        )
    tail = norm(indicator_project(phi, reach, grid.L)) ** 2
    if tail > TAIL_GATE:
        raise ValidationError(
            f"preset carries mass {tail:.3e} within reach of the far wall"
        )
    return grid, phi


def attach_ratios(records: list[ConvergenceRecord]) -> list[ConvergenceRecord]:
    """Fill per-group consecutive ratios, first rung of each group empty."""
    last: dict[tuple, float] = {}
    out = []
    for r in records:
        key = (r.preset, r.b, r.t, r.metric)
        prev = last.get(key)
        ratio = r.value / prev if prev not in (None, 0.0) else None
        last[key] = r.value
        out.append(replace(r, ratio=ratio))
    return out


def sweep_theorem1(cfg: SweepConfig) -> list[ConvergenceRecord]:
    """Distance between the viscous flow and the two-wave form, per rung.

    Emits one record per (epsilon, t) and a per-epsilon supremum row
    over the configured times.  Supremum rows carry the largest
    configured time in their t column so every metric keeps a single
    ratio chain.
    """
    grid, phi = _prepare(cfg)
    t_sup = max(cfg.times)
    records = []
    for e in cfg.eps:
        worst = 0.0
        for t in cfg.times:
            r = remainder_norm(phi, EvolutionParams(epsilon=e, b=cfg.b, t=t))
            worst = max(worst, r)
            records.append(
                ConvergenceRecord(cfg.preset, cfg.b, t, e, "remainder", r)
            )
        records.append(
            ConvergenceRecord(cfg.preset, cfg.b, t_sup, e, "sup_remainder", worst)
        )
    return records


def sweep_weak_decay(cfg: SweepConfig, g_name: str = "bump12") -> list[ConvergenceRecord]:
    """Weak-convergence residual against a fixed test vector.

    Measures |<g, u_eps(t) - V(t) phi>|, which must vanish even though
    the strong distance stalls for b > 0.
    """
    grid, phi = _prepare(cfg)
    g = get_preset(g_name, grid)
    metric = f"weak[{g_name}]"
    records = []
    for e in cfg.eps:
        for t in cfg.times:
            u = spectral_evolve(phi, EvolutionParams(epsilon=e, b=cfg.b, t=t))
            v = limit_group_V(phi, cfg.b, t)
            gap = abs(inner(g, WaveFunction(grid, u.values - v.values)))
            records.append(ConvergenceRecord(cfg.preset, cfg.b, t, e, metric, gap))
    return records


def standard_observables(
    grid: Grid, kinds: tuple[str, ...], cut: float | None = None
) -> dict[str, object]:
    """The stock observables sweeps report on.

    indicator: multiplication by the indicator of [0, cut]; sweeps place
               the cut at the transported front b t
    sigmoid:   multiplication by a smooth step centered at x = 2
    projector: rank-one projection onto the bump12 direction
    """
    out: dict[str, object] = {}
    for kind in kinds:
        if kind == "indicator":
            if cut is None:
                raise ValidationError("the indicator observable needs a cut position")
            vals = np.where(grid.x <= cut, 1.0, 0.0)
            out[kind] = MultiplicationObservable(BoundedFunction(grid, vals, 1.0))
        elif kind == "sigmoid":
            vals = 1.0 / (1.0 + np.exp(-4.0 * (grid.x - 2.0)))
            out[kind] = MultiplicationObservable(BoundedFunction(grid, vals, 1.0))
        elif kind == "projector":
            d = get_preset("bump12", grid)
            unit = WaveFunction(grid, d.values / norm(d))
            out[kind] = FiniteRankObservable(coeffs=(1.0,), directions=(unit,))
        else:
            raise ValidationError(f"unknown observable kind {kind!r}")
    return out


def sweep_expectations(
    cfg: SweepConfig, kinds: tuple[str, ...] = ("indicator", "sigmoid", "projector")
) -> list[ConvergenceRecord]:
    """Gap between viscous expectations and their limit values, per rung.

    Multiplication observables are compared with the two-branch limit,
    finite-rank ones with the transported-branch limit alone.
    """
    if cfg.b <= 0:
        raise ValidationError("expectation sweeps run in the inflow regime b > 0")
    grid, phi = _prepare(cfg)
    # the indicator band tracks the transported front, so one set per time
    obs_by_t = {
        t: standard_observables(grid, kinds, cut=cfg.b * t) for t in cfg.times
    }
    limits: dict[tuple[str, float], float] = {}
    for t in cfg.times:
        for kind, a in obs_by_t[t].items():
            if isinstance(a, MultiplicationObservable):
                lim = float(np.real(mult_expectation_limit(phi, a.f, cfg.b, t)))
            else:
                lim = comp_expectation_limit(phi, a, cfg.b, t)
            limits[(kind, t)] = lim
    records = []
    for e in cfg.eps:
        for t in cfg.times:
            u = spectral_evolve(phi, EvolutionParams(epsilon=e, b=cfg.b, t=t))
            for kind, a in obs_by_t[t].items():
                val = float(np.real(expectation(u, a)))
                gap = abs(val - limits[(kind, t)])
                records.append(
                    ConvergenceRecord(cfg.preset, cfg.b, t, e, f"gap[{kind}]", gap)
                )
    return records


def sweep_prop2(cfg: SweepConfig, psi_name: str = "xexp") -> list[ConvergenceRecord]:
    """Strong and weak residuals against pure transport, both drift signs.

    For b < 0 the strong residual itself must vanish.  For b > 0 it
    stalls at the absorbed mass: the sweep then also records the weak
    residual against a fixed test vector, which does vanish, and the
    stall defect |residual^2 - (1 - alpha)|, which exposes exactly
    where the strong limit fails.
    """
    grid, phi = _prepare(cfg)
    psi = get_preset(psi_name, grid)
    records = []
    for e in cfg.eps:
        for t in cfg.times:
            u = spectral_evolve(phi, EvolutionParams(epsilon=e, b=cfg.b, t=t))
            v = limit_group_V(phi, cfg.b, t)
            diff = WaveFunction(grid, u.values - v.values)
            strong = norm(diff)
            records.append(
                ConvergenceRecord(cfg.preset, cfg.b, t, e, "strong_gap", strong)
            )
            if cfg.b > 0:
                weak = abs(inner(psi, diff))
                records.append(
                    ConvergenceRecord(
                        cfg.preset, cfg.b, t, e, f"weak_gap[{psi_name}]", weak
                    )
                )
                lost = 1.0 - comp_state_evolve(phi, cfg.b, t).alpha
                records.append(
                    ConvergenceRecord(
                        cfg.preset, cfg.b, t, e, "stall_defect",
                        abs(strong ** 2 - lost),
                    )
                )
    return records


def divergence_probe(cfg: SweepConfig, eps0: float | None = None) -> list[ConvergenceRecord]:
    """A single compact observable with no limiting expectation.

    Takes the defect against pure transport on a halving ladder of
    PROBE_RUNGS viscosities, orthonormalizes the defect directions,
    and forms the alternating-sign sum of their rank-one projections.
    Expectations of that one observable then oscillate between rungs
    by at least half the absorbed mass instead of settling, which is
    the whole point: on compact observables the viscous flow has no
    limit beyond its transported part.

    Also records each defect's squared norm, which must sit near the
    absorbed mass 1 - alpha if the two-wave picture is right.
    """
    if cfg.b <= 0:
        raise ValidationError("the divergence probe runs in the inflow regime b > 0")
    grid, phi = _prepare(cfg)
    t = max(cfg.times)
    if eps0 is None:
        eps0 = cfg.eps[0]
    ladder = tuple(eps0 * 0.5 ** j for j in range(PROBE_RUNGS))
    for e in ladder:
        rep = resolution_report(grid, e, cfg.b)
        if not rep.admissible:
            raise ResolutionError(
                f"probe rung epsilon={e:g} is underresolved on this grid"
            )
    lost = 1.0 - comp_state_evolve(phi, cfg.b, t).alpha
    if lost < PROBE_MIN_ABSORBED:
        raise ValidationError(
            f"absorbed mass {lost:.3e} at t={t:g} is below {PROBE_MIN_ABSORBED}, "
            "nothing for the probe to act on"
        )

    v = limit_group_V(phi, cfg.b, t)
    states = []
    defects = []
    for e in ladder:
        u = spectral_evolve(phi, EvolutionParams(epsilon=e, b=cfg.b, t=t))
        states.append(u)
        defects.append(WaveFunction(grid, u.values - v.values))

    directions: list[WaveFunction] = []
    coeffs: list[float] = []
    for j, d in enumerate(defects):
        r = d.values / norm(d)
        for q in directions:
            r = r - complex(inner(q, WaveFunction(grid, r))) * q.values
        res = WaveFunction(grid, r)
        if norm(res) < GS_DROP_TOL:
            continue
        directions.append(WaveFunction(grid, res.values / norm(res)))
        coeffs.append(1.0 if j % 2 == 0 else -1.0)
    probe = FiniteRankObservable(coeffs=tuple(coeffs), directions=tuple(directions))

    records = []
    values = []
    for e, u, d in zip(ladder, states, defects):
        records.append(
            ConvergenceRecord(
                cfg.preset, cfg.b, t, e, "probe_gap_sq", norm(d) ** 2
            )
        )
        val = float(np.real(expectation(u, probe)))
        values.append(val)
        records.append(
            ConvergenceRecord(cfg.preset, cfg.b, t, e, "probe_expectation", val)
        )
    records.append(
        ConvergenceRecord(
            cfg.preset, cfg.b, t, eps0, "probe_one_minus_alpha", lost
        )
    )
    records.append(
        ConvergenceRecord(
            cfg.preset, cfg.b, t, eps0, "probe_peak_to_peak",
            max(values) - min(values),
        )
    )
    return records


@dataclass(frozen=True)
class Check:
    """One verdict rule evaluated over matching metric groups."""

    kind: str
    metric: str
    bound: float | None = None


def claim_checks(claim: str, b: float = 1.0) -> tuple[Check, ...]:
    """Default verdict rules for each claim keyword."""
    if claim == "thm1":
        return (
            Check("decreasing", "sup_remainder"),
            Check("halved", "sup_remainder", 0.5),
        )
    if claim == "weak":
        return (Check("decreasing", "weak[bump12]"),)
    if claim == "thm5":
        return (
            Check("decreasing", "gap[indicator]"),
            Check("final_le", "gap[indicator]", 0.02),
            Check("decreasing", "gap[sigmoid]"),
            Check("final_le", "gap[sigmoid]", 0.02),
        )
    if claim == "thm3":
        return (
            Check("decreasing", "gap[projector]"),
            Check("final_le", "gap[projector]", 0.02),
        )
    if claim == "prop2":
        if b < 0:
            return (
                Check("decreasing", "strong_gap"),
                Check("final_le", "strong_gap", 0.05),
            )
        return (
            Check("decreasing", "weak_gap[xexp]"),
            Check("final_le", "weak_gap[xexp]", 0.02),
            Check("final_le", "stall_defect", 0.05),
        )
    if claim == "thm2":
        return (
            Check("probe_contrast", "probe_expectation", 0.5),
            Check("within", "probe_gap_sq", 0.05),
        )
    raise ValidationError(f"unknown claim {claim!r}, expected one of {CLAIMS}")


def run_claim(claim: str, cfg: SweepConfig, g_name: str = "bump12") -> tuple[
    list[ConvergenceRecord], tuple[Check, ...]
]:
    """Run the sweep behind a claim keyword with its default checks."""
    if claim == "thm1":
        return sweep_theorem1(cfg), claim_checks(claim)
    if claim == "weak":
        recs = sweep_weak_decay(cfg, g_name=g_name)
        return recs, (Check("decreasing", f"weak[{g_name}]"),)
    if claim == "thm5":
        return sweep_expectations(cfg, kinds=("indicator", "sigmoid")), claim_checks(claim)
    if claim == "thm3":
        return sweep_expectations(cfg, kinds=("projector",)), claim_checks(claim)
    if claim == "prop2":
        return sweep_prop2(cfg), claim_checks(claim, b=cfg.b)
    if claim == "thm2":
        return divergence_probe(cfg), claim_checks(claim)
    raise ValidationError(f"unknown claim {claim!r}, expected one of {CLAIMS}")


def _groups(records: list[ConvergenceRecord], metric: str) -> dict[tuple, list[ConvergenceRecord]]:
    out: dict[tuple, list[ConvergenceRecord]] = {}
    for r in records:
        if r.metric == metric:
            out.setdefault((r.preset, r.b, r.t), []).append(r)
    return out


def _singleton(records: list[ConvergenceRecord], metric: str) -> float:
    vals = [r.value for r in records if r.metric == metric]
    if len(vals) != 1:
        raise ValidationError(f"expected exactly one {metric!r} record, got {len(vals)}")
    return vals[0]


def evaluate_checks(
    records: list[ConvergenceRecord], checks: tuple[Check, ...]
) -> dict:
    """Evaluate verdict rules over a record set."""
    results = []
    for c in checks:
        groups = _groups(records, c.metric)
        detail = []
        ok = len(groups) > 0
        if c.kind in ("decreasing", "final_le", "halved"):
            for key in sorted(groups):
                vals = [r.value for r in groups[key]]
                if c.kind == "decreasing":
                    gok = len(vals) >= 2 and all(
                        y < x for x, y in zip(vals, vals[1:])
                    )
                elif c.kind == "final_le":
                    gok = vals[-1] <= c.bound
                else:
                    gok = len(vals) >= 2 and vals[-1] <= c.bound * vals[0]
                ok = ok and gok
                detail.append(
                    {
                        "preset": key[0], "b": key[1], "t": key[2],
                        "n": len(vals), "first": vals[0], "last": vals[-1],
                        "pass": gok,
                    }
                )
        elif c.kind == "probe_contrast":
            lost = _singleton(records, "probe_one_minus_alpha")
            ptp = _singleton(records, "probe_peak_to_peak")
            ok = ptp >= c.bound * lost
            detail.append({"peak_to_peak": ptp, "target": c.bound * lost, "pass": ok})
        elif c.kind == "within":
            lost = _singleton(records, "probe_one_minus_alpha")
            for key in sorted(groups):
                for r in groups[key]:
                    gok = abs(r.value - lost) <= c.bound
                    ok = ok and gok
                    detail.append(
                        {"epsilon": r.epsilon, "value": r.value, "pass": gok}
                    )
        else:
            raise ValidationError(f"unknown check kind {c.kind!r}")
        results.append(
            {
                "name": f"{c.kind}:{c.metric}",
                "kind": c.kind,
                "metric": c.metric,
                "bound": c.bound,
                "pass": bool(ok),
                "detail": detail,
            }
        )
    return {
        "n_records": len(records),
        "checks": results,
        "all_pass": bool(all(r["pass"] for r in results)),
    }


def emit_report(
    records: list[ConvergenceRecord],
    csv_path: str | Path,
    json_path: str | Path | None = None,
    checks: tuple[Check, ...] = (),
) -> dict:
    """Write the CSV (and JSON verdicts when asked) and return the verdicts.

    Output is deterministic: fixed 17-significant-digit scientific
    format, fixed row order, explicit newlines.
    """
    records = attach_ratios(records)
    lines = [CSV_HEADER]
    for r in records:
        ratio = "" if r.ratio is None else f"{r.ratio:.16e}"
        lines.append(
            f"{r.preset},{r.b:.16e},{r.t:.16e},{r.epsilon:.16e},"
            f"{r.metric},{r.value:.16e},{ratio}"
        )
    Path(csv_path).write_text("\n".join(lines) + "\n", encoding="ascii")
    verdicts = evaluate_checks(records, checks)
    if json_path is not None:
        Path(json_path).write_text(
            json.dumps(verdicts, indent=2, sort_keys=True) + "\n", encoding="ascii"
        )
    return verdicts
