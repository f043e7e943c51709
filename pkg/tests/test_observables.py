import numpy as np
import pytest

from halfline import (
    BoundedFunction,
    EvolutionParams,
    FiniteRankObservable,
    MultiplicationObservable,
    ValidationError,
    WaveFunction,
    comp_expectation_limit,
    comp_state_evolve,
    expectation,
    get_preset,
    indicator_project,
    inner,
    make_grid,
    norm,
    regularized_expectation,
    spectral_evolve,
)


@pytest.fixture(scope="module")
def setup():
    g = make_grid(20.0, 2 ** 12)
    return g, get_preset("xexp", g)


def test_finite_rank_validation(setup):
    g, xe = setup
    with pytest.raises(ValidationError):
        FiniteRankObservable(coeffs=(1.0, 2.0), directions=(xe,))
    with pytest.raises(ValidationError):
        FiniteRankObservable(coeffs=(), directions=())
    stretched = WaveFunction(g, 1.5 * xe.values)
    with pytest.raises(ValidationError):
        FiniteRankObservable(coeffs=(1.0,), directions=(stretched,))
    other = get_preset("xexp", make_grid(10.0, 2 ** 12))
    with pytest.raises(ValidationError):
        FiniteRankObservable(coeffs=(1.0, 1.0), directions=(xe, other))


def test_mult_expectation_matches_band_mass(setup):
    g, xe = setup
    ind = MultiplicationObservable(
        BoundedFunction(g, np.where((g.x >= 0.5) & (g.x <= 1.5), 1.0, 0.0), 1.0)
    )
    val = expectation(xe, ind)
    assert isinstance(val, float)
    assert val == pytest.approx(norm(indicator_project(xe, 0.5, 1.5)) ** 2, rel=1e-12)


def test_mult_expectation_is_bounded_by_the_bound(setup):
    g, xe = setup
    f = BoundedFunction(g, np.sin(g.x), 1.0)
    val = expectation(xe, MultiplicationObservable(f))
    assert abs(val) <= f.bound * norm(xe) ** 2 * (1.0 + 1e-12)


def test_finite_rank_expectation_manual(setup):
    g, xe = setup
    d1 = get_preset("bump12", g)
    d2 = get_preset("bump23", g)
    obs = FiniteRankObservable(coeffs=(2.0, -1.0), directions=(d1, d2))
    want = 2.0 * abs(inner(d1, xe)) ** 2 - abs(inner(d2, xe)) ** 2
    assert expectation(xe, obs) == pytest.approx(want, rel=1e-12)


def test_expectation_rejects_grid_mismatch(setup):
    g, xe = setup
    other = make_grid(10.0, 2 ** 12)
    f = BoundedFunction(other, np.ones(other.N), 1.0)
    with pytest.raises(ValidationError):
        expectation(xe, MultiplicationObservable(f))


def test_regularized_expectation_consistent(setup):
    g, xe = setup
    p = EvolutionParams(0.3, 1.0, 0.7)
    obs = MultiplicationObservable(
        BoundedFunction(g, np.where((g.x >= 1.0) & (g.x <= 2.0), 1.0, 0.0), 1.0)
    )
    via_helper = regularized_expectation(xe, obs, p)
    via_hand = expectation(spectral_evolve(xe, p), obs)
    assert via_helper == via_hand


def test_comp_limit_picks_out_alpha(setup):
    g, xe = setup
    st = comp_state_evolve(xe, 1.0, 0.8)
    proj = FiniteRankObservable(coeffs=(1.0,), directions=(st.shift_profile,))
    val = comp_expectation_limit(xe, proj, 1.0, 0.8)
    assert val == pytest.approx(st.alpha, abs=1e-12)


def test_comp_limit_vanishes_when_fully_singular(setup):
    g, xe = setup
    proj = FiniteRankObservable(coeffs=(1.0,), directions=(xe,))
    assert comp_expectation_limit(xe, proj, 1.0, 45.0) == 0.0


def test_comp_limit_rejects_multiplication(setup):
    g, xe = setup
    f = MultiplicationObservable(BoundedFunction(g, np.ones(g.N), 1.0))
    with pytest.raises(ValidationError):
        comp_expectation_limit(xe, f, 1.0, 0.5)
