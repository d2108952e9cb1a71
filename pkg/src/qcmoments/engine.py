"""Expectation values of Pauli strings in the pairwise trial state.

Three routes are provided:

* exact pair-product contraction (cheap at any qubit count: the state is a
  product over 2-qubit blocks, so a string's expectation is a product of
  per-pair table lookups);
* full statevector contraction, used as an independent cross-check at small
  qubit counts;
* simulated projective measurement: rotate each group's basis label onto
  the computational basis, sample bitstrings shot by shot, and reconstruct
  member expectations from outcome parities.

Measurement randomness is drawn from counter-based streams keyed by the
master seed and the group label, so results do not depend on the order in
which groups are measured.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    IncompatibleMemberError,
    QubitMismatchError,
    ResourceGuardError,
)
from .grouping import TPBGroup, label_covers
from .models import TrialStateSpec
from .pauli import PauliString
from .rng import stream

__all__ = [
    "PairProductState",
    "trial_state",
    "expectation_exact",
    "expectations_exact",
    "expectation_statevector",
    "pair_product_statevector",
    "measure_group",
    "expectations_from_counts",
    "apply_damping_noise",
    "MeasurementStore",
    "STATEVECTOR_MAX_QUBITS",
]

#: Largest qubit count for which full statevectors are constructed.
STATEVECTOR_MAX_QUBITS = 22

# 2x2 Pauli matrices indexed by the symplectic letter code x | (z << 1):
# I, X, Z, Y.
_PAULI_2x2 = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
)

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_S_DAGGER = np.array([[1, 0], [0, -1j]], dtype=complex)

# Basis rotation per label letter code: maps the letter's +1 eigenstate to
# |0>.  X -> H; Y -> phase-adjoint then Hadamard; I and Z need nothing.
_ROTATIONS = (
    np.eye(2, dtype=complex),
    _HADAMARD,
    np.eye(2, dtype=complex),
    _HADAMARD @ _S_DAGGER,
)


class PairProductState:
    """Product of 2-qubit blocks over pairs ``(0,1), (2,3), ...``.

    ``blocks[k]`` holds four real amplitudes for pair ``k`` in the basis
    ``|b_a b_b>`` indexed as ``(bit_a << 1) | bit_b``.  On odd ``q`` the
    last qubit carries a separate single-qubit block.
    """

    __slots__ = ("spec", "blocks", "lone_block", "_pair_tables", "_lone_table")

    def __init__(
        self,
        spec: TrialStateSpec,
        blocks: Sequence[np.ndarray],
        lone_block: np.ndarray | None,
    ):
        self.spec = spec
        self.blocks = [np.asarray(b, dtype=np.float64) for b in blocks]
        self.lone_block = (
            None if lone_block is None else np.asarray(lone_block, dtype=np.float64)
        )
        for b in self.blocks:
            if b.shape != (4,) or not np.isclose(b @ b, 1.0, atol=1e-12):
                raise ValueError("pair blocks must be normalized 4-vectors")
        if (self.lone_block is None) != (spec.lone_qubit is None):
            raise ValueError("lone block must be present exactly when q is odd")
        self._pair_tables: list[np.ndarray] | None = None
        self._lone_table: np.ndarray | None = None

    @property
    def q(self) -> int:
        return self.spec.q

    def _tables(self) -> tuple[list[np.ndarray], np.ndarray | None]:
        """Per-pair tables T[ca*4 + cb] = <block| P_ca (x) P_cb |block>."""
        if self._pair_tables is None:
            tables = []
            for block in self.blocks:
                t = np.empty(16, dtype=np.float64)
                for ca in range(4):
                    for cb in range(4):
                        op = np.kron(_PAULI_2x2[ca], _PAULI_2x2[cb])
                        t[ca * 4 + cb] = np.real(block @ op @ block)
                tables.append(t)
            self._pair_tables = tables
            if self.lone_block is not None:
                lt = np.empty(4, dtype=np.float64)
                for c in range(4):
                    lt[c] = np.real(self.lone_block @ _PAULI_2x2[c] @ self.lone_block)
                self._lone_table = lt
        return self._pair_tables, self._lone_table


def trial_state(spec: TrialStateSpec) -> PairProductState:
    """Build the pairwise trial state for ``spec``.

    Each pair is prepared by Ry(theta) on the second qubit, a CNOT onto the
    first, and an X on the first, which yields
    ``cos(theta/2)|10> + sin(theta/2)|01>``; a leftover qubit stays in
    ``|0>``.  Only the resulting amplitudes are stored.
    """
    c = np.cos(spec.theta / 2.0)
    s = np.sin(spec.theta / 2.0)
    block = np.array([0.0, s, c, 0.0])
    blocks = [block.copy() for _ in range(spec.q // 2)]
    lone = np.array([1.0, 0.0]) if spec.q % 2 else None
    return PairProductState(spec, blocks, lone)


def _letter_codes(x: int, z: int, m: int) -> int:
    return ((x >> m) & 1) | (((z >> m) & 1) << 1)


def expectation_exact(state: PairProductState, p: PauliString) -> float:
    """Exact ``<state| p |state>`` via per-pair table contraction."""
    if p.q != state.q:
        raise QubitMismatchError(f"string on {p.q} qubits, state on {state.q}")
    tables, lone_table = state._tables()
    value = 1.0
    x = p.x_mask
    z = p.z_mask
    for k, table in enumerate(tables):
        ca = _letter_codes(x, z, 2 * k)
        cb = _letter_codes(x, z, 2 * k + 1)
        value *= table[ca * 4 + cb]
    if lone_table is not None:
        value *= lone_table[_letter_codes(x, z, state.q - 1)]
    return float(value)


def expectations_exact(
    state: PairProductState, xs: np.ndarray, zs: np.ndarray
) -> np.ndarray:
    """Vectorized :func:`expectation_exact` over mask arrays."""
    tables, lone_table = state._tables()
    xs = np.asarray(xs, dtype=np.uint64)
    zs = np.asarray(zs, dtype=np.uint64)
    out = np.ones(len(xs), dtype=np.float64)
    one = np.uint64(1)
    for k, table in enumerate(tables):
        a = np.uint64(2 * k)
        b = np.uint64(2 * k + 1)
        ca = ((xs >> a) & one) | (((zs >> a) & one) << one)
        cb = ((xs >> b) & one) | (((zs >> b) & one) << one)
        out *= table[(ca << np.uint64(2)) | cb]
    if lone_table is not None:
        m = np.uint64(state.q - 1)
        c = ((xs >> m) & one) | (((zs >> m) & one) << one)
        out *= lone_table[c]
    return out


def pair_product_statevector(state: PairProductState) -> np.ndarray:
    """Expand the pair-product state into a dense real statevector.

    Amplitude index bit ``m`` is the value of qubit ``m``.
    """
    if state.q > 25:
        raise ResourceGuardError(
            f"statevector for q={state.q} would need {2**state.q * 8 / 2**30:.0f}"
            " GiB; refusing"
        )
    vec = np.ones(1, dtype=np.float64)
    for block in state.blocks:
        # Pair basis (bit_a << 1) | bit_b must land on amplitude bits
        # (a, b) = (2k, 2k+1) with bit m of the index = qubit m: the new
        # pair occupies the two next-higher bits, with qubit a the lower.
        reordered = block[[0, 2, 1, 3]]
        vec = np.kron(reordered, vec)
    if state.lone_block is not None:
        vec = np.kron(state.lone_block, vec)
    return vec


def _apply_pauli_dense(v: np.ndarray, p: PauliString) -> np.ndarray:
    """Apply a Pauli string to a dense vector (index bit m = qubit m)."""
    n = len(v)
    idx = np.arange(n, dtype=np.uint64)
    phase = (1j) ** ((p.x_mask & p.z_mask).bit_count())
    signs = 1.0 - 2.0 * (
        (np.bitwise_count(idx & np.uint64(p.z_mask)) & np.uint8(1)).astype(np.float64)
    )
    out = np.empty(n, dtype=np.complex128)
    out[idx ^ np.uint64(p.x_mask)] = phase * signs * v
    return out


def expectation_statevector(theta: float, q: int, p: PauliString) -> float:
    """Independent dense-statevector route for trial-state expectations.

    Guarded to ``q <= 22``; intended for validating the pair-product route.
    """
    if q > STATEVECTOR_MAX_QUBITS:
        raise ResourceGuardError(
            f"statevector route limited to q <= {STATEVECTOR_MAX_QUBITS}, got {q}"
        )
    if p.q != q:
        raise QubitMismatchError(f"string on {p.q} qubits, state on {q}")
    state = trial_state(TrialStateSpec(q, theta))
    v = pair_product_statevector(state)
    w = _apply_pauli_dense(v, p)
    value = np.vdot(v, w)
    return float(np.real(value))


# -- measurement simulation --------------------------------------------------


def _bits_to_string(value: int, q: int) -> str:
    return "".join("1" if (value >> m) & 1 else "0" for m in range(q))


def _string_to_bits(bitstring: str) -> int:
    value = 0
    for m, ch in enumerate(bitstring):
        if ch == "1":
            value |= 1 << m
    return value


def measure_group(
    state: PairProductState, group: TPBGroup, shots: int, seed: int
) -> dict[str, int]:
    """Simulate ``shots`` projective measurements in the group's basis.

    Returns bitstring counts (qubit 0 first).  The random stream is keyed
    by ``(seed, group label)``.
    """
    if shots <= 0:
        raise ValueError(f"shots must be positive, got {shots}")
    if group.label.q != state.q:
        raise QubitMismatchError(
            f"group label on {group.label.q} qubits, state on {state.q}"
        )
    rng = stream(seed, "measure", group.label.label)
    lx = group.label.x_mask
    lz = group.label.z_mask
    samples = np.zeros(shots, dtype=np.uint64)
    for k, block in enumerate(state.blocks):
        a = 2 * k
        b = 2 * k + 1
        ua = _ROTATIONS[_letter_codes(lx, lz, a)]
        ub = _ROTATIONS[_letter_codes(lx, lz, b)]
        rotated = np.kron(ua, ub) @ block.astype(complex)
        probs = np.abs(rotated) ** 2
        probs /= probs.sum()
        outcomes = rng.choice(4, size=shots, p=probs)
        samples |= (outcomes >> 1).astype(np.uint64) << np.uint64(a)
        samples |= (outcomes & 1).astype(np.uint64) << np.uint64(b)
    if state.lone_block is not None:
        m = state.q - 1
        u = _ROTATIONS[_letter_codes(lx, lz, m)]
        rotated = u @ state.lone_block.astype(complex)
        probs = np.abs(rotated) ** 2
        probs /= probs.sum()
        outcomes = rng.choice(2, size=shots, p=probs)
        samples |= outcomes.astype(np.uint64) << np.uint64(m)
    values, counts = np.unique(samples, return_counts=True)
    return {
        _bits_to_string(int(v), state.q): int(c) for v, c in zip(values, counts)
    }


def expectations_from_counts(
    counts: Mapping[str, int],
    members: Iterable[PauliString],
    label: PauliString | None = None,
) -> dict[PauliString, float]:
    """Parity-reconstruct member expectations from bitstring counts.

    When ``label`` is given, each member must be determined by it
    (letters agree on the member's support); otherwise raises
    :class:`IncompatibleMemberError`.  The identity string maps to exactly
    1.0.
    """
    outcome_bits = np.array(
        [_string_to_bits(b) for b in counts], dtype=np.uint64
    )
    outcome_counts = np.array(list(counts.values()), dtype=np.float64)
    total = outcome_counts.sum()
    if total <= 0:
        raise ValueError("counts are empty")
    out: dict[PauliString, float] = {}
    for member in members:
        if label is not None and not label_covers(label, member):
            raise IncompatibleMemberError(
                f"member {member.label} incompatible with measured label "
                f"{label.label}"
            )
        sup = np.uint64(member.x_mask | member.z_mask)
        parity = np.bitwise_count(outcome_bits & sup) & np.uint8(1)
        signs = 1.0 - 2.0 * parity.astype(np.float64)
        out[member] = float((outcome_counts @ signs) / total)
    return out


def apply_damping_noise(
    expectations: Mapping[PauliString, float], lam: float
) -> dict[PauliString, float]:
    """Damping noise proxy: scale each expectation by (1-lam)**support.

    ``lam = 0`` is a no-op; ``lam = 1`` collapses every non-identity
    expectation to zero.
    """
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"damping strength must lie in [0, 1], got {lam}")
    factor = 1.0 - lam
    return {p: v * factor**p.support_size for p, v in expectations.items()}


@dataclass
class MeasurementStore:
    """Bitstring counts per measured group label.

    The store remembers its master seed and per-group shot budget; merging
    two stores requires identical settings and identical counts on any
    shared label (single-writer semantics).
    """

    seed: int
    shots_per_group: int
    records: dict[str, dict[str, int]] = field(default_factory=dict)

    @classmethod
    def measure(
        cls,
        state: PairProductState,
        groups: Iterable[TPBGroup],
        shots: int,
        seed: int,
    ) -> "MeasurementStore":
        store = cls(seed=seed, shots_per_group=shots)
        for group in groups:
            store.records[group.label.label] = measure_group(
                state, group, shots, seed
            )
        return store

    def merge(self, other: "MeasurementStore") -> None:
        if (self.seed, self.shots_per_group) != (other.seed, other.shots_per_group):
            raise ValueError("cannot merge stores with different seed or shots")
        for label, counts in other.records.items():
            mine = self.records.get(label)
            if mine is None:
                self.records[label] = dict(counts)
            elif mine != counts:
                raise ValueError(f"conflicting counts for label {label!r}")

    def expectations(self, groups: Iterable[TPBGroup]) -> dict[PauliString, float]:
        """Derive member expectations, each from its own group's counts."""
        out: dict[PauliString, float] = {}
        for group in groups:
            counts = self.records.get(group.label.label)
            if counts is None:
                raise KeyError(f"no counts recorded for label {group.label.label!r}")
            out.update(
                expectations_from_counts(counts, group.members, group.label)
            )
        return out

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "shots_per_group": self.shots_per_group,
            "groups": [
                {"label": label, "counts": dict(counts)}
                for label, counts in sorted(self.records.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MeasurementStore":
        store = cls(
            seed=int(data["seed"]),
            shots_per_group=int(data["shots_per_group"]),
        )
        for rec in data["groups"]:
            store.records[rec["label"]] = {
                b: int(c) for b, c in rec["counts"].items()
            }
        return store

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "MeasurementStore":
        return cls.from_json_dict(json.loads(text))
