"""Moments, cumulants, and both infinum routes."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcmoments.engine import MeasurementStore, trial_state
from qcmoments.errors import EstimateUndefinedError, MissingExpectationError
from qcmoments.estimator import (
    CumulantVector,
    MomentVector,
    assemble_moments,
    bootstrap_estimates,
    cumulant_sequence,
    cumulants,
    infinum_estimate,
    infinum_numeric_z,
    moments_from_state,
    variational_estimate,
)
from qcmoments.grouping import group_tpb
from qcmoments.models import CouplingSet, TrialStateSpec, build_hamiltonian, build_lattice
from qcmoments.pauli import PauliString, hamiltonian_powers

NEEL_MOMENTS = (-0.5, 1.25, -1.625, 2.5625)  # q=2 uniform chain at theta=pi
NEEL_CUMULANTS = (-0.5, 1.0, 0.0, -2.0)


def vec(*values, provenance="exact"):
    return CumulantVector(tuple(float(v) for v in values), provenance)


def two_point_moments(p, e0, e1, nmax=4):
    return [p * e0**n + (1 - p) * e1**n for n in range(1, nmax + 1)]


# -- moment containers ------------------------------------------------------


def test_moment_vector_validation():
    MomentVector((1.0, 2.0))
    with pytest.raises(ValueError):
        MomentVector(())
    with pytest.raises(ValueError):
        MomentVector((1.0,), provenance="guessed")
    with pytest.raises(ValueError):
        MomentVector((1.0, 0.5))  # m2 < m1^2 cannot be exact
    MomentVector((1.0, 0.5), provenance="sampled")  # noise may do this


def test_moment_accessors():
    m = MomentVector((0.5, 1.5, 2.5))
    assert m.nmax == 3
    assert m.moment(2) == 1.5
    with pytest.raises(ValueError):
        m.moment(0)
    with pytest.raises(ValueError):
        m.moment(4)


# -- cumulant recursion ------------------------------------------------------


def test_neel_q2_frozen_pipeline(chain2):
    _, h = chain2
    powers = hamiltonian_powers(h, 4)
    state = trial_state(TrialStateSpec(2, math.pi))
    m = moments_from_state(powers[1:], state)
    assert m.values == pytest.approx(NEEL_MOMENTS, abs=1e-14)
    c = cumulants(m)
    assert c.values == pytest.approx(NEEL_CUMULANTS, abs=1e-13)
    est = infinum_estimate(c)
    assert est.value == pytest.approx(-1.5, abs=1e-12)
    assert est.fallback == "none"


def test_cumulants_eigenstate_point():
    e = 0.73
    m = MomentVector(tuple(e**n for n in range(1, 5)))
    assert cumulants(m).values == pytest.approx((e, 0.0, 0.0, 0.0), abs=1e-15)


@given(
    st.fractions(min_value=-3, max_value=3, max_denominator=20),
    st.fractions(min_value=-3, max_value=3, max_denominator=20),
    st.fractions(min_value=-3, max_value=3, max_denominator=20),
    st.fractions(min_value=-3, max_value=3, max_denominator=20),
)
def test_recursion_matches_closed_forms_exactly(m1, m2, m3, m4):
    """The binomial recursion reproduces the textbook closed forms, checked
    in exact rational arithmetic."""
    c1, c2, c3, c4 = cumulant_sequence([m1, m2, m3, m4])
    assert c1 == m1
    assert c2 == m2 - m1**2
    assert c3 == m3 - 3 * m1 * m2 + 2 * m1**3
    assert c4 == m4 - 4 * m1 * m3 - 3 * m2**2 + 12 * m1**2 * m2 - 6 * m1**4


def test_shift_covariance():
    """H -> H + s shifts c1 and both estimates by s; c2..c4 unchanged."""
    base = two_point_moments(0.3, -1.2, 0.7)
    s = 0.83
    shifted = [
        sum(
            math.comb(n, k) * s ** (n - k) * ([1.0] + base)[k]
            for k in range(n + 1)
        )
        for n in range(1, 5)
    ]
    cb = cumulant_sequence(base)
    cs = cumulant_sequence(shifted)
    assert cs[0] == pytest.approx(cb[0] + s, abs=1e-12)
    assert cs[1:] == pytest.approx(cb[1:], abs=1e-10)
    eb = infinum_estimate(vec(*cb))
    es = infinum_estimate(vec(*cs))
    assert es.value == pytest.approx(eb.value + s, abs=1e-9)
    assert variational_estimate(vec(*cs)).value == pytest.approx(
        variational_estimate(vec(*cb)).value + s, abs=1e-12
    )


# -- analytic infinum ---------------------------------------------------------


def test_infinum_examples():
    assert infinum_estimate(vec(-0.5, 1, 0, -2)).value == pytest.approx(-1.5, abs=1e-12)
    assert infinum_estimate(vec(0, 1, 0, -1)).value == pytest.approx(
        -math.sqrt(2.0), abs=1e-12
    )


def test_infinum_eigenstate_fallback():
    est = infinum_estimate(vec(-1.5, 0, 0, 0))
    assert est.value == -1.5
    assert est.fallback == "eigenstate"


def test_infinum_needs_four_cumulants():
    with pytest.raises(ValueError):
        infinum_estimate(vec(1.0, 2.0, 3.0))


def test_infinum_two_point_spectra_exact():
    """For a trial state spread over two eigenstates the analytic form
    recovers the lower energy exactly."""
    rng = np.random.default_rng(5)
    for _ in range(200):
        p = rng.uniform(0.05, 0.95)
        e0, e1 = sorted(rng.uniform(-3, 3, size=2))
        if e1 - e0 < 0.1:
            continue
        c = cumulant_sequence(two_point_moments(p, e0, e1))
        est = infinum_estimate(vec(*c))
        assert est.value == pytest.approx(e0, abs=1e-8)


def test_infinum_variational_never_below():
    """The correction only lowers the estimate: E_inf <= c1 on regular input."""
    rng = np.random.default_rng(13)
    for _ in range(200):
        p = rng.uniform(0.05, 0.95)
        e0, e1 = sorted(rng.uniform(-3, 3, size=2))
        if e1 - e0 < 0.1:
            continue
        c = cumulant_sequence(two_point_moments(p, e0, e1))
        assert infinum_estimate(vec(*c)).value <= c[0] + 1e-12


# -- numeric z route ----------------------------------------------------------


def test_numeric_z_example():
    est = infinum_numeric_z(vec(0, 1, 0, -1), z_order=1)
    assert est.value == pytest.approx(-math.sqrt(2.0), abs=1e-9)
    assert est.z_star == pytest.approx(1.0, abs=1e-6)


def test_numeric_z_eigenstate():
    est = infinum_numeric_z(vec(2.5, 0, 0, 0), z_order=1)
    assert est.value == 2.5
    assert est.fallback == "eigenstate"


def test_numeric_z_matches_analytic_on_neel():
    est = infinum_numeric_z(vec(*NEEL_CUMULANTS), z_order=1)
    assert est.value == pytest.approx(-1.5, abs=1e-9)


def test_numeric_z_order2_needs_c5():
    with pytest.raises(ValueError):
        infinum_numeric_z(vec(0, 1, 0, -1), z_order=2)
    est = infinum_numeric_z(vec(0, 1, 0, -1, 0.5), z_order=2)
    assert math.isfinite(est.value)
    assert est.z_order == 2
    with pytest.raises(ValueError):
        infinum_numeric_z(vec(0, 1, 0, -1, 0.5), z_order=3)


def test_numeric_z_unbounded_raises():
    # d = (c2*c4 - c3^2)/(2 c2^2) = 1/2 > 0 and slope at infinity negative
    with pytest.raises(EstimateUndefinedError):
        infinum_numeric_z(vec(0.0, 1.0, -1.0, 2.0), z_order=1)


def test_numeric_z_negative_c2_hits_eigenstate_guard():
    """Noise-driven negative c2 collapses to the variational value."""
    est = infinum_numeric_z(vec(0.7, -1.0, 0.3, 0.2), z_order=1)
    assert est.value == 0.7
    assert est.fallback == "eigenstate"


def test_analytic_numeric_agreement_fuzz():
    """Spot version of the exhaustive acceptance fuzz."""
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 300:
        c1 = rng.uniform(-2, 2)
        c2 = rng.uniform(0.05, 3.0)
        c3 = rng.uniform(-2, 2)
        c4 = rng.uniform(-3, 3)
        if c2 * c4 >= c3 * c3:  # keep the bounded-domain regular family
            continue
        analytic = infinum_estimate(vec(c1, c2, c3, c4))
        if analytic.fallback != "none":
            continue
        numeric = infinum_numeric_z(vec(c1, c2, c3, c4), z_order=1)
        assert numeric.value == pytest.approx(analytic.value, abs=1e-9)
        checked += 1


# -- assembly -----------------------------------------------------------------


def test_assemble_moments_and_missing(square23):
    _, h = square23
    powers = hamiltonian_powers(h, 4)
    state = trial_state(TrialStateSpec(6, math.pi))
    direct = moments_from_state(powers[1:], state)

    from qcmoments.engine import expectations_exact

    union = {}
    for hn in powers[1:]:
        for p, _ in hn:
            union.setdefault(p)
    ps = list(union)
    xs = np.array([p.x_mask for p in ps], dtype=np.uint64)
    zs = np.array([p.z_mask for p in ps], dtype=np.uint64)
    table = dict(zip(ps, expectations_exact(state, xs, zs).tolist()))
    assembled = assemble_moments(powers[1:], table, provenance="exact")
    assert assembled.values == pytest.approx(direct.values, abs=1e-12)

    dropped = dict(table)
    dropped.pop(ps[3])
    with pytest.raises(MissingExpectationError):
        assemble_moments(powers[1:], dropped)
    with pytest.raises(ValueError):
        assemble_moments(powers[1:3], table)


# -- bootstrap ----------------------------------------------------------------


@pytest.fixture(scope="module")
def sampled_run():
    graph = build_lattice("chain", 4)
    h = build_hamiltonian(graph, CouplingSet.uniform(graph))
    powers = hamiltonian_powers(h, 4)
    union = {}
    for hn in powers[1:]:
        for p, _ in hn:
            union.setdefault(p)
    groups = group_tpb(list(union), graph.layout())
    state = trial_state(TrialStateSpec(4, math.pi * 0.9))
    store = MeasurementStore.measure(state, groups, shots=2048, seed=12)
    return store, groups, powers[1:]


def test_bootstrap_deterministic(sampled_run):
    store, groups, sums = sampled_run
    a = bootstrap_estimates(store, groups, sums, resamples=50, seed=4)
    b = bootstrap_estimates(store, groups, sums, resamples=50, seed=4)
    assert a == b
    c = bootstrap_estimates(store, groups, sums, resamples=50, seed=5)
    assert a != c
    assert a.resamples == 50
    assert a.variational_std > 0.0
    assert a.infinum_std > 0.0


def test_bootstrap_spread_tracks_estimates(sampled_run):
    store, groups, sums = sampled_run
    summary = bootstrap_estimates(store, groups, sums, resamples=100, seed=8)
    table = store.expectations(groups)
    observed = assemble_moments(sums, table)
    c = cumulants(observed)
    point = infinum_estimate(c).value
    spread = summary.infinum_std
    center = float(np.mean(summary.infinum_samples))
    assert abs(center - point) < 6.0 * spread


def test_bootstrap_missing_string(sampled_run):
    store, groups, sums = sampled_run
    with pytest.raises(MissingExpectationError):
        bootstrap_estimates(store, groups[:1], sums, resamples=5, seed=0)
    with pytest.raises(ValueError):
        bootstrap_estimates(store, groups, sums, resamples=1, seed=0)
