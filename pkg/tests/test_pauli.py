"""Pauli algebra, sum compression, and power expansion."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import kron_pauli, kron_sum
from qcmoments import kernels
from qcmoments.errors import ImaginaryResidueError, QubitMismatchError
from qcmoments.models import CouplingSet, build_hamiltonian, build_lattice, sample_couplings
from qcmoments.pauli import (
    PauliString,
    WeightedPauliSum,
    hamiltonian_power,
    hamiltonian_powers,
    pauli_mul,
    sum_compress,
)

LETTERS = "IXYZ"


def random_string(rng, q):
    return PauliString.from_label(
        "".join(rng.choice(list(LETTERS)) for _ in range(q))
    )


# -- single strings -------------------------------------------------------


def test_label_round_trip():
    for label in ("I", "X", "XIZY", "ZZZZZZ", "IYXI"):
        assert PauliString.from_label(label).label == label


def test_letter_and_support():
    p = PauliString.from_label("XIZY")
    assert [p.letter(m) for m in range(4)] == ["X", "I", "Z", "Y"]
    assert p.support == (0, 2, 3)
    assert p.support_size == 3
    assert not p.is_identity
    assert PauliString.identity(4).is_identity


def test_invalid_labels():
    with pytest.raises(ValueError):
        PauliString.from_label("")
    with pytest.raises(ValueError):
        PauliString.from_label("XQ")
    with pytest.raises(ValueError):
        PauliString(2, 1 << 2, 0)
    with pytest.raises(ValueError):
        PauliString(0, 0, 0)


@pytest.mark.parametrize(
    "a,b,phase,product",
    [
        ("X", "Y", 1j, "Z"),
        ("Y", "Z", 1j, "X"),
        ("Z", "X", 1j, "Y"),
        ("Y", "X", -1j, "Z"),
        ("XX", "YY", -1.0, "ZZ"),
        ("XY", "YX", 1.0, "ZZ"),
        ("I", "X", 1.0, "X"),
    ],
)
def test_mul_examples(a, b, phase, product):
    ph, p = pauli_mul(PauliString.from_label(a), PauliString.from_label(b))
    assert ph == phase
    assert p.label == product


def test_mul_full_single_qubit_table():
    """All 16 letter pairs against literal 2x2 matrix products."""
    for la in LETTERS:
        for lb in LETTERS:
            phase, p = pauli_mul(
                PauliString.from_label(la), PauliString.from_label(lb)
            )
            expected = kron_pauli(la) @ kron_pauli(lb)
            assert np.allclose(phase * kron_pauli(p.label), expected)


def test_mul_involution_and_mismatch():
    p = PauliString.from_label("XYZI")
    phase, out = pauli_mul(p, p)
    assert phase == 1.0 and out.is_identity
    with pytest.raises(QubitMismatchError):
        pauli_mul(p, PauliString.from_label("X"))


@given(st.integers(0, 4**4 - 1), st.integers(0, 4**4 - 1), st.integers(0, 4**4 - 1))
def test_mul_associative(ia, ib, ic):
    def decode(i):
        return PauliString.from_label("".join(LETTERS[(i >> (2 * m)) & 3] for m in range(4)))

    a, b, c = decode(ia), decode(ib), decode(ic)
    ph1, ab = pauli_mul(a, b)
    ph2, ab_c = pauli_mul(ab, c)
    ph3, bc = pauli_mul(b, c)
    ph4, a_bc = pauli_mul(a, bc)
    assert ab_c == a_bc
    assert ph1 * ph2 == ph3 * ph4


@given(st.integers(0, 4**3 - 1), st.integers(0, 4**3 - 1))
def test_mul_matches_dense(ia, ib):
    def decode(i):
        return PauliString.from_label("".join(LETTERS[(i >> (2 * m)) & 3] for m in range(3)))

    a, b = decode(ia), decode(ib)
    phase, p = pauli_mul(a, b)
    assert np.allclose(
        phase * kron_pauli(p.label), kron_pauli(a.label) @ kron_pauli(b.label)
    )


# -- weighted sums --------------------------------------------------------


def test_sum_merge_and_cancel():
    xx = PauliString.from_label("XX")
    merged = sum_compress(2, [(1.0, xx), (2.0, xx)])
    assert len(merged) == 1
    assert merged.get(xx) == 3.0

    cancelled = sum_compress(2, [(1.0, xx), (-1.0, xx)])
    assert len(cancelled) == 0


def test_sum_rejects_imaginary_residue():
    xx = PauliString.from_label("XX")
    with pytest.raises(ImaginaryResidueError):
        sum_compress(2, [(1.0j, xx)])
    # tiny residues are dropped, not fatal
    s = sum_compress(2, [(1.0 + 1e-15j, xx)])
    assert s.get(xx) == 1.0


def test_sum_rejects_mismatched_terms():
    with pytest.raises(QubitMismatchError):
        sum_compress(2, [(1.0, PauliString.from_label("XXX"))])


def test_sum_canonical_order_and_eq():
    terms = [
        (0.5, PauliString.from_label("ZZ")),
        (0.25, PauliString.from_label("XX")),
        (-1.0, PauliString.from_label("IY")),
    ]
    a = sum_compress(2, terms)
    b = sum_compress(2, list(reversed(terms)))
    assert a == b
    labels = [p.label for p, _ in a]
    assert labels == sorted(labels, key=lambda s: (
        PauliString.from_label(s).x_mask, PauliString.from_label(s).z_mask
    ))


def test_sum_json_round_trip():
    graph = build_lattice("square", (2, 2))
    h = build_hamiltonian(graph, sample_couplings(graph, 3))
    again = WeightedPauliSum.loads(h.dumps())
    assert again == h
    payload = json.loads(h.dumps())
    assert set(payload) == {"q", "terms"}
    assert all(set(t) == {"string", "weight"} for t in payload["terms"])


# -- powers ---------------------------------------------------------------


def test_power_q2_frozen(chain2):
    _, h = chain2
    h2 = hamiltonian_power(h, 2)
    expected = {
        "II": 0.75,
        "XX": -0.5,
        "YY": -0.5,
        "ZZ": -0.5,
    }
    assert {p.label: w for p, w in h2} == pytest.approx(expected)


def test_power_levels(chain2):
    _, h = chain2
    levels = hamiltonian_powers(h, 3)
    assert len(levels) == 4
    ident = levels[0]
    assert len(ident) == 1 and ident.strings()[0].is_identity
    assert levels[1] == h  # n=1 bit-exact
    with pytest.raises(ValueError):
        hamiltonian_powers(h, -1)


@pytest.mark.parametrize("kind,dims", [("chain", 4), ("square", (2, 3))])
def test_power_matches_dense_matrix_power(kind, dims):
    graph = build_lattice(kind, dims)
    h = build_hamiltonian(graph, sample_couplings(graph, 17))
    dense = kron_sum(h)
    acc = np.eye(1 << graph.q, dtype=complex)
    for n in range(1, 5):
        acc = acc @ dense
        hn = hamiltonian_power(h, n)
        assert np.max(np.abs(kron_sum(hn) - acc)) < 1e-9


def test_power_hermitian_weights_real():
    graph = build_lattice("square", (2, 2))
    h = build_hamiltonian(graph, sample_couplings(graph, 23))
    for n in range(1, 5):
        _, _, ws = hamiltonian_power(h, n).masks()
        assert ws.dtype == np.float64


def test_expand_backends_bit_identical(square23):
    """The compiled and pure-Python kernels must agree to the last bit."""
    if "cython" not in kernels.available_backends():
        pytest.skip("compiled backend not built")
    _, h = square23
    with kernels.use_backend("cython"):
        fast = hamiltonian_powers(h, 4)
    with kernels.use_backend("python"):
        slow = hamiltonian_powers(h, 4)
    for a, b in zip(fast, slow):
        ax, az, aw = a.masks()
        bx, bz, bw = b.masks()
        assert np.array_equal(ax, bx)
        assert np.array_equal(az, bz)
        assert np.array_equal(aw, bw)
