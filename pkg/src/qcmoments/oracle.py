"""Exact reference values via dense or iterative diagonalization.

Two independent routes:

* a dense matrix build plus ``eigvalsh`` (the authority for q <= 10), and
* a matrix-free Lanczos ground state via ``scipy.sparse.linalg.eigsh``
  for q <= 16, extendable to q <= 25 when explicitly allowed.

Each weighted string acts on a computational-basis vector as

    P |b> = i^popcount(x & z) * (-1)^popcount(b & z) * |b XOR x>

so a matvec is one XOR-permutation plus a sign mask per term.  When every
term carries an even number of Y letters the folded coefficients are real
and the whole operator stays in float64.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import ConvergenceError, ResourceGuardError
from .pauli import WeightedPauliSum

__all__ = [
    "SparseHamiltonian",
    "dense_matrix",
    "dense_ground_energy",
    "iterative_ground_energy",
    "exact_ground_energy",
    "exact_moments",
    "DENSE_MAX_QUBITS",
    "ITERATIVE_MAX_QUBITS",
    "STRETCH_MAX_QUBITS",
]

DENSE_MAX_QUBITS = 10
ITERATIVE_MAX_QUBITS = 16
STRETCH_MAX_QUBITS = 25

# Precompute per-term sign tables only while they stay comfortably small.
_PRECOMPUTE_BYTES = 1 << 27


class SparseHamiltonian:
    """Matrix-free action of a weighted string sum on state vectors."""

    def __init__(self, h: WeightedPauliSum):
        xs, zs, ws = h.masks()
        y_counts = np.bitwise_count(xs & zs)
        # i^popcount(x & z), folded into the weight.
        if np.all(y_counts % 2 == 0):
            self.dtype = np.float64
            coeffs = ws * np.where(y_counts % 4 == 0, 1.0, -1.0)
        else:
            self.dtype = np.complex128
            coeffs = ws * (1j ** y_counts.astype(np.int64))
        self.q = h.q
        self.dim = 1 << h.q
        self._xs = xs
        self._zs = zs
        self._coeffs = coeffs
        self._idx = np.arange(self.dim, dtype=np.uint64)
        self._signs = None
        if len(ws) * self.dim * 8 <= _PRECOMPUTE_BYTES:
            parity = (
                np.bitwise_count(self._idx[None, :] & zs[:, None]) & np.uint8(1)
            )
            self._signs = 1.0 - 2.0 * parity.astype(np.float64)

    def _term_signs(self, t: int) -> np.ndarray:
        if self._signs is not None:
            return self._signs[t]
        parity = np.bitwise_count(self._idx & self._zs[t]) & np.uint8(1)
        return 1.0 - 2.0 * parity.astype(np.float64)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v).reshape(self.dim)
        out = np.zeros(self.dim, dtype=np.result_type(self.dtype, v.dtype))
        for t in range(len(self._coeffs)):
            # XOR with a constant permutes indices bijectively, so the
            # fancy-indexed += never hits a slot twice.
            out[self._idx ^ self._xs[t]] += self._coeffs[t] * (
                self._term_signs(t) * v
            )
        return out

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(
            (self.dim, self.dim), matvec=self.matvec, dtype=self.dtype
        )


def dense_matrix(h: WeightedPauliSum) -> np.ndarray:
    """Full 2^q x 2^q matrix; only sensible for small q."""
    if h.q > DENSE_MAX_QUBITS:
        raise ResourceGuardError(
            f"dense matrix for q={h.q} exceeds the q<={DENSE_MAX_QUBITS} guard"
        )
    dim = 1 << h.q
    idx = np.arange(dim, dtype=np.uint64)
    m = np.zeros((dim, dim), dtype=np.complex128)
    for p, w in h:
        x = np.uint64(p.x_mask)
        z = np.uint64(p.z_mask)
        phase = 1j ** int.bit_count(p.x_mask & p.z_mask)
        parity = np.bitwise_count(idx & z) & np.uint8(1)
        signs = 1.0 - 2.0 * parity.astype(np.float64)
        m[idx ^ x, idx] += w * phase * signs
    return m


def dense_ground_energy(h: WeightedPauliSum) -> float:
    return float(np.linalg.eigvalsh(dense_matrix(h))[0])


def _available_memory_bytes() -> int:
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError):  # pragma: no cover - non-Linux fallback
        return 1 << 62


def iterative_ground_energy(h: WeightedPauliSum, allow_stretch: bool = False) -> float:
    """Lanczos ground energy without materializing the matrix."""
    if h.q > STRETCH_MAX_QUBITS:
        raise ResourceGuardError(
            f"q={h.q} exceeds the iterative limit q<={STRETCH_MAX_QUBITS}"
        )
    if h.q > ITERATIVE_MAX_QUBITS:
        if not allow_stretch:
            raise ResourceGuardError(
                f"q={h.q} needs allow_stretch=True (limit without it is "
                f"q<={ITERATIVE_MAX_QUBITS})"
            )
        needed = 10 * 8 * (1 << h.q)
        if _available_memory_bytes() < needed:
            raise ResourceGuardError(
                f"stretch run at q={h.q} wants ~{needed / 2**30:.1f} GiB free"
            )
    op = SparseHamiltonian(h)
    ncv = 8 if h.q > ITERATIVE_MAX_QUBITS else None
    try:
        vals = eigsh(
            op.as_linear_operator(),
            k=1,
            which="SA",
            ncv=ncv,
            return_eigenvectors=False,
        )
    except ArpackNoConvergence as exc:
        raise ConvergenceError(f"Lanczos did not converge for q={h.q}") from exc
    return float(vals[0])


def exact_ground_energy(h: WeightedPauliSum, allow_stretch: bool = False) -> float:
    """Ground energy by the best route for the size at hand."""
    if h.q <= DENSE_MAX_QUBITS:
        return dense_ground_energy(h)
    return iterative_ground_energy(h, allow_stretch=allow_stretch)


def exact_moments(
    h: WeightedPauliSum, vector: np.ndarray, nmax: int = 4
) -> tuple[float, ...]:
    """<v|H^n|v> for n = 1..nmax by repeated matvec on the state vector."""
    if h.q > ITERATIVE_MAX_QUBITS:
        raise ResourceGuardError(
            f"exact moments guard: q={h.q} > {ITERATIVE_MAX_QUBITS}"
        )
    op = SparseHamiltonian(h)
    v = np.asarray(vector, dtype=np.complex128).reshape(op.dim)
    norm = np.linalg.norm(v)
    if not np.isclose(norm, 1.0, atol=1e-9):
        raise ValueError(f"state vector norm {norm!r} is not 1")
    out = []
    w = v
    for _ in range(nmax):
        w = op.matvec(w)
        out.append(float(np.real(np.vdot(v, w))))
    return tuple(out)
