"""Shared fixtures and an independent dense-matrix oracle.

The oracle builds operators by Kronecker products of literal 2x2 matrices,
deliberately avoiding the package's symplectic mask arithmetic so the two
implementations cannot share a bug.
"""

import numpy as np
import pytest
from hypothesis import settings

from qcmoments.models import CouplingSet, build_hamiltonian, build_lattice

settings.register_profile("ci", deadline=None, max_examples=100, derandomize=True)
settings.load_profile("ci")

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def kron_pauli(label: str) -> np.ndarray:
    """Dense matrix of a Pauli label, qubit 0 = least significant bit.

    The amplitude index convention (bit m of the index is qubit m) makes
    qubit 0 the innermost factor, so the product runs from the last letter
    down to the first.
    """
    m = np.eye(1, dtype=complex)
    for letter in reversed(label):
        m = np.kron(m, _SINGLE[letter])
    return m


def kron_sum(wps) -> np.ndarray:
    """Dense matrix of a WeightedPauliSum via the literal kron oracle."""
    dim = 1 << wps.q
    total = np.zeros((dim, dim), dtype=complex)
    for p, w in wps:
        total += w * kron_pauli(p.label)
    return total


@pytest.fixture(scope="session")
def chain2():
    graph = build_lattice("chain", 2)
    return graph, build_hamiltonian(graph, CouplingSet.uniform(graph))


@pytest.fixture(scope="session")
def square23():
    graph = build_lattice("square", (2, 3))
    return graph, build_hamiltonian(graph, CouplingSet.uniform(graph))


# -- acceptance reporting ------------------------------------------------

_acceptance_lines: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(criterion: int, ok: bool, detail: str) -> None:
        status = "PASS" if ok else "FAIL"
        _acceptance_lines[criterion] = (
            f"criterion {criterion:2d}: {status} — {detail}"
        )

    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for k in sorted(_acceptance_lines):
        terminalreporter.write_line(_acceptance_lines[k])
