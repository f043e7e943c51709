import math

import numpy as np
import pytest

from halfline import (
    EvolutionParams,
    GROUP_TOL,
    KERNEL_NORM_TOL,
    ResolutionError,
    ResolutionWarning,
    UNITARITY_RTOL,
    ValidationError,
    WaveFunction,
    asymptotic_evolve,
    get_preset,
    kernel_evolve,
    limit_group_V,
    make_grid,
    norm,
    remainder_norm,
    resolution_report,
    shift_sample,
    spectral_evolve,
)
from halfline.evolvers import _kernel_sum_direct, _kernel_sum_fast


@pytest.fixture(scope="module")
def small():
    g = make_grid(10.0, 2 ** 10)
    return g, get_preset("xexp", g)


@pytest.fixture(scope="module")
def medium():
    g = make_grid(20.0, 2 ** 12)
    return g, get_preset("xexp", g)


@pytest.mark.parametrize(
    "eps,b,t",
    [(0.0, 1.0, 1.0), (-0.1, 1.0, 1.0), (0.1, 0.0, 1.0), (0.1, 1.0, -0.5),
     (math.nan, 1.0, 1.0), (0.1, math.inf, 1.0)],
)
def test_params_validation(eps, b, t):
    with pytest.raises(ValidationError):
        EvolutionParams(epsilon=eps, b=b, t=t)


def test_resolution_report_admissibility():
    g = make_grid(40.0, 2 ** 16)
    rep = resolution_report(g, 0.05, 1.0)
    assert rep.wavelength == pytest.approx(2.0 * math.pi * 0.05)
    assert rep.admissible
    assert rep.points_per_wavelength > 500
    coarse = resolution_report(make_grid(40.0, 2 ** 14), 1e-6, 1.0)
    assert not coarse.admissible


def test_spectral_refuses_underresolved():
    g = make_grid(40.0, 2 ** 14)
    phi = get_preset("xexp", g)
    with pytest.raises(ResolutionError):
        spectral_evolve(phi, EvolutionParams(1e-6, 1.0, 1.0))


def test_spectral_t0_identity(small):
    g, phi = small
    out = spectral_evolve(phi, EvolutionParams(0.3, 1.0, 0.0))
    assert np.array_equal(out.values, phi.values)


def test_spectral_unitary(small):
    g, phi = small
    for eps, t in ((0.3, 0.7), (0.1, 1.5), (0.05, 3.0)):
        u = spectral_evolve(phi, EvolutionParams(eps, 1.0, t))
        assert abs(norm(u) - 1.0) <= UNITARITY_RTOL


def test_spectral_negative_drift_unitary(small):
    g, phi = small
    u = spectral_evolve(phi, EvolutionParams(0.3, -1.0, 0.7))
    assert abs(norm(u) - 1.0) <= UNITARITY_RTOL


def test_spectral_eigenmode_without_gauge():
    # With the gauge factors off, the flow must be diagonal over sine
    # modes with eigenvalue eps (k pi / L)^2.
    g = make_grid(10.0, 2 ** 10)
    mode = get_preset("sine-mode-3", g)
    eps, t = 0.4, 0.9
    out = spectral_evolve(mode, EvolutionParams(eps, 1.0, t), _gauge=False)
    lam = eps * (3.0 * math.pi / g.L) ** 2 * t
    exact = np.exp(-1j * lam) * mode.values
    np.testing.assert_allclose(out.values, exact, atol=1e-12)


def test_spectral_group_law(small):
    g, phi = small
    p_full = EvolutionParams(0.3, 1.0, 0.7)
    direct = spectral_evolve(phi, p_full)
    two_step = spectral_evolve(
        spectral_evolve(phi, EvolutionParams(0.3, 1.0, 0.3)),
        EvolutionParams(0.3, 1.0, 0.4),
    )
    assert norm(WaveFunction(g, two_step.values - direct.values)) <= GROUP_TOL


def test_spectral_refuses_loose_boundary(small):
    g, _ = small
    gauss = WaveFunction(g, np.exp(-g.x ** 2).astype(complex))
    with pytest.raises(ValidationError):
        spectral_evolve(gauss, EvolutionParams(0.3, 1.0, 0.5))


def test_kernel_recurrence_matches_direct_phases(small):
    g, phi = small
    args = (g.x, phi.values, 0.3, 1.0, 0.5, g.h)
    fast = _kernel_sum_fast(*args)
    direct = _kernel_sum_direct(*args)
    np.testing.assert_allclose(fast, direct, atol=1e-12)


def test_kernel_agrees_with_spectral(small):
    g, phi = small
    p = EvolutionParams(0.3, 1.0, 0.5)
    uk = kernel_evolve(phi, p)
    us = spectral_evolve(phi, p)
    gap = norm(WaveFunction(g, uk.values - us.values))
    assert gap <= 1e-3
    assert abs(norm(uk) - 1.0) <= KERNEL_NORM_TOL


def test_kernel_refusals(small):
    g, phi = small
    with pytest.raises(ValidationError):
        kernel_evolve(phi, EvolutionParams(0.3, 1.0, 0.0))
    with pytest.raises(ValidationError):
        kernel_evolve(phi, EvolutionParams(0.3, -1.0, 0.5))
    with pytest.raises(ResolutionError):
        kernel_evolve(phi, EvolutionParams(1e-6, 1.0, 0.5))
    gauss = WaveFunction(g, np.exp(-g.x ** 2).astype(complex))
    with pytest.raises(ValidationError):
        kernel_evolve(gauss, EvolutionParams(0.3, 1.0, 0.5))


def test_kernel_chirp_gate(small):
    # The gauge phase is resolved here, but at such a short horizon the
    # kernel chirp is not; only the kernel route must refuse.
    g, phi = small
    p = EvolutionParams(0.03, 1.0, 0.05)
    assert resolution_report(g, p.epsilon, p.b).admissible
    with pytest.raises(ResolutionError):
        kernel_evolve(phi, p)
    spectral_evolve(phi, p)


def test_asymptotic_t0_identity(small):
    g, phi = small
    out = asymptotic_evolve(phi, EvolutionParams(0.3, 1.0, 0.0))
    np.testing.assert_allclose(out.values, phi.values, atol=1e-14)


def test_asymptotic_negative_drift_is_pure_shift(small):
    g, phi = small
    p = EvolutionParams(0.3, -1.0, 0.7)
    out = asymptotic_evolve(phi, p)
    assert np.array_equal(out.values, shift_sample(phi, -0.7).values)


def test_asymptotic_warns_when_underresolved(small):
    g, phi = small
    with pytest.warns(ResolutionWarning):
        asymptotic_evolve(phi, EvolutionParams(1e-6, 1.0, 0.5))


def test_remainder_shrinks_with_viscosity(small):
    g, phi = small
    r_coarse = remainder_norm(phi, EvolutionParams(0.3, 1.0, 0.5))
    r_fine = remainder_norm(phi, EvolutionParams(0.15, 1.0, 0.5))
    assert r_coarse == pytest.approx(0.5725204074492337, rel=1e-9)
    assert r_fine == pytest.approx(0.264797841097291, rel=1e-9)
    assert r_fine < r_coarse


def test_limit_group_contraction_and_isometry(medium):
    g, phi = medium
    drop = limit_group_V(phi, 1.0, 0.8)
    assert norm(drop) ** 2 == pytest.approx(0.4645428964146263, rel=1e-12)
    assert norm(drop) <= 1.0 + 1e-9
    keep = limit_group_V(phi, -1.0, 0.7)
    assert abs(norm(keep) - 1.0) <= 1e-4
    with pytest.raises(ValidationError):
        limit_group_V(phi, 0.0, 0.5)


def test_evolved_state_is_deterministic(small):
    g, phi = small
    p = EvolutionParams(0.3, 1.0, 0.5)
    assert np.array_equal(
        spectral_evolve(phi, p).values, spectral_evolve(phi, p).values
    )
    assert np.array_equal(
        kernel_evolve(phi, p).values, kernel_evolve(phi, p).values
    )
