"""Reference diagonalization against literal kron matrices."""

import math

import numpy as np
import pytest

from qcmoments.engine import pair_product_statevector, trial_state
from qcmoments.errors import ResourceGuardError
from qcmoments.estimator import cumulant_sequence, moments_from_state
from qcmoments.models import (
    CouplingSet,
    TrialStateSpec,
    build_hamiltonian,
    build_lattice,
    sample_couplings,
)
from qcmoments.oracle import (
    SparseHamiltonian,
    dense_ground_energy,
    dense_matrix,
    exact_ground_energy,
    exact_moments,
    iterative_ground_energy,
)
from qcmoments.pauli import PauliString, WeightedPauliSum, hamiltonian_powers

from conftest import kron_sum


def random_sum(rng, q, terms):
    letters = "IXYZ"
    out = []
    for _ in range(terms):
        label = "".join(rng.choice(list(letters)) for _ in range(q))
        out.append((float(rng.uniform(-2, 2)), PauliString.from_label(label)))
    return WeightedPauliSum.from_terms(q, out)


def test_chain2_spectrum(chain2):
    _, h = chain2
    m = dense_matrix(h)
    spectrum = np.linalg.eigvalsh(m)
    assert spectrum == pytest.approx([-1.5, 0.5, 0.5, 0.5], abs=1e-12)
    assert dense_ground_energy(h) == pytest.approx(-1.5, abs=1e-12)


def test_single_z_ground():
    h = WeightedPauliSum.from_terms(1, [(1.0, PauliString.from_label("Z"))])
    assert dense_ground_energy(h) == pytest.approx(-1.0, abs=1e-15)


def test_dense_matches_kron_oracle():
    """The XOR-permutation build must equal the literal tensor product."""
    rng = np.random.default_rng(2)
    for q in (1, 2, 3, 4, 5):
        h = random_sum(rng, q, terms=3 * q)
        assert np.max(np.abs(dense_matrix(h) - kron_sum(h))) < 1e-12


def test_matvec_matches_dense():
    rng = np.random.default_rng(7)
    h = random_sum(rng, 5, terms=12)
    op = SparseHamiltonian(h)
    m = dense_matrix(h)
    v = rng.normal(size=32) + 1j * rng.normal(size=32)
    assert np.allclose(op.matvec(v), m @ v, atol=1e-12)


def test_real_dtype_detection():
    xx = WeightedPauliSum.from_terms(2, [(1.0, PauliString.from_label("XX"))])
    yy = WeightedPauliSum.from_terms(2, [(1.0, PauliString.from_label("YY"))])
    xy = WeightedPauliSum.from_terms(2, [(1.0, PauliString.from_label("XY"))])
    assert SparseHamiltonian(xx).dtype == np.float64
    assert SparseHamiltonian(yy).dtype == np.float64  # two Y letters
    assert SparseHamiltonian(xy).dtype == np.complex128
    m = dense_matrix(yy)
    assert np.max(np.abs(m.imag)) < 1e-15


def test_dense_vs_iterative(square23):
    _, h = square23
    e_dense = dense_ground_energy(h)
    e_iter = iterative_ground_energy(h)
    assert e_iter == pytest.approx(e_dense, abs=1e-9)
    assert exact_ground_energy(h) == e_dense  # dispatches dense at q=6


def test_exact_moments_eigenstate(chain2):
    _, h = chain2
    m = dense_matrix(h)
    vals, vecs = np.linalg.eigh(m)
    ground = vecs[:, 0]
    moments = exact_moments(h, ground, nmax=4)
    assert moments == pytest.approx([vals[0] ** n for n in (1, 2, 3, 4)], abs=1e-10)
    # An eigenstate has no spread: every cumulant beyond c1 vanishes.
    c = cumulant_sequence(moments)
    assert c[1:] == pytest.approx([0.0, 0.0, 0.0], abs=1e-10)


def test_exact_moments_neel_frozen(chain2):
    _, h = chain2
    state = trial_state(TrialStateSpec(2, math.pi))
    vector = pair_product_statevector(state)
    assert exact_moments(h, vector) == pytest.approx(
        (-0.5, 1.25, -1.625, 2.5625), abs=1e-12
    )


def test_matvec_moments_match_pair_product(square23):
    """Two fully independent moment routes agree across a theta sweep."""
    graph, h = square23
    powers = hamiltonian_powers(h, 4)
    for theta in np.linspace(0.7 * math.pi, 1.3 * math.pi, 13):
        state = trial_state(TrialStateSpec(graph.q, float(theta)))
        via_pairs = moments_from_state(powers[1:], state).values
        via_matvec = exact_moments(h, pair_product_statevector(state))
        assert via_matvec == pytest.approx(via_pairs, abs=1e-9)


def test_ground_energy_bounds_variational(square23):
    graph, h = square23
    powers = hamiltonian_powers(h, 4)
    e0 = dense_ground_energy(h)
    for theta in (0.8 * math.pi, math.pi, 1.2 * math.pi):
        state = trial_state(TrialStateSpec(graph.q, theta))
        c1 = moments_from_state(powers[1:], state).values[0]
        assert e0 <= c1 + 1e-12


def test_random_couplings_routes_agree():
    graph = build_lattice("square", (2, 4))
    for seed in (3, 11):
        h = build_hamiltonian(graph, sample_couplings(graph, seed))
        assert iterative_ground_energy(h) == pytest.approx(
            dense_ground_energy(h), abs=1e-9
        )


def _wide_hamiltonian(q):
    return WeightedPauliSum.from_terms(q, [(1.0, PauliString(q, 1, 0))])


def test_resource_guards(monkeypatch):
    with pytest.raises(ResourceGuardError):
        dense_matrix(_wide_hamiltonian(11))
    with pytest.raises(ResourceGuardError):
        iterative_ground_energy(_wide_hamiltonian(17))
    with pytest.raises(ResourceGuardError):
        iterative_ground_energy(_wide_hamiltonian(26), allow_stretch=True)
    with pytest.raises(ResourceGuardError):
        exact_moments(_wide_hamiltonian(17), np.zeros(2))

    import qcmoments.oracle as oracle_module

    monkeypatch.setattr(oracle_module, "_available_memory_bytes", lambda: 1 << 20)
    with pytest.raises(ResourceGuardError):
        iterative_ground_energy(_wide_hamiltonian(17), allow_stretch=True)


def test_exact_moments_norm_validation(chain2):
    _, h = chain2
    with pytest.raises(ValueError):
        exact_moments(h, np.array([1.0, 1.0, 0.0, 0.0]))
