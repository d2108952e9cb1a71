"""Pauli strings, weighted Pauli sums, and Hamiltonian powers.

Strings are held in symplectic form: a pair of bit masks ``(x_mask,
z_mask)`` where bit ``m`` of each mask records the X and Z component of the
letter on qubit ``m`` (``I`` = 00, ``X`` = 10, ``Z`` = 01, ``Y`` = 11).
Products then reduce to XOR of masks plus a power-of-i phase, and the
single-qubit convention ``X.Y = iZ``, ``Y.Z = iX``, ``Z.X = iY`` is
accumulated qubit by qubit through popcounts.

Text labels list letters in qubit-index order, so ``"XIZ"`` puts X on
qubit 0 and Z on qubit 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import kernels
from .errors import ImaginaryResidueError, QubitMismatchError

__all__ = [
    "PauliString",
    "WeightedPauliSum",
    "pauli_mul",
    "sum_compress",
    "hamiltonian_power",
    "hamiltonian_powers",
    "DEFAULT_TOL",
    "IMAG_TOL",
]

#: Default absolute compression tolerance applied after each product level.
DEFAULT_TOL = 1e-12

#: Fixed ceiling on the imaginary residue allowed on any accumulated term
#: of a sum that must be real (powers of a Hermitian input).
IMAG_TOL = 1e-12

# Letters indexed by the 2-bit code x | (z << 1).
_CODE_TO_LETTER = "IXZY"
_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

#: Largest qubit count a WeightedPauliSum supports (masks must fit uint64).
MAX_QUBITS = 64


@dataclass(frozen=True)
class PauliString:
    """An immutable Pauli string on ``q`` qubits in symplectic form."""

    q: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"qubit count must be positive, got {self.q}")
        top = 1 << self.q
        if not (0 <= self.x_mask < top and 0 <= self.z_mask < top):
            raise ValueError(
                f"masks out of range for q={self.q}: "
                f"x={self.x_mask:#x} z={self.z_mask:#x}"
            )

    @classmethod
    def identity(cls, q: int) -> "PauliString":
        return cls(q, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Build from a letter string such as ``"XIZY"`` (qubit 0 first)."""
        if not label:
            raise ValueError("empty Pauli label")
        x = 0
        z = 0
        for m, letter in enumerate(label):
            try:
                xb, zb = _LETTER_TO_BITS[letter]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {letter!r} in {label!r}") from None
            x |= xb << m
            z |= zb << m
        return cls(len(label), x, z)

    @property
    def label(self) -> str:
        return "".join(self.letter(m) for m in range(self.q))

    def letter(self, m: int) -> str:
        code = ((self.x_mask >> m) & 1) | (((self.z_mask >> m) & 1) << 1)
        return _CODE_TO_LETTER[code]

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x_mask | self.z_mask
        return tuple(m for m in range(self.q) if (mask >> m) & 1)

    @property
    def support_size(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def __str__(self) -> str:
        return self.label


def pauli_mul(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Product ``a . b`` as ``(phase, string)`` with ``phase`` in {1, i, -1, -i}."""
    if a.q != b.q:
        raise QubitMismatchError(f"cannot multiply strings on {a.q} and {b.q} qubits")
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    k = (
        (a.x_mask & a.z_mask).bit_count()
        + (b.x_mask & b.z_mask).bit_count()
        + 2 * (a.z_mask & b.x_mask).bit_count()
        - (x & z).bit_count()
    ) & 3
    return _PHASES[k], PauliString(a.q, x, z)


class WeightedPauliSum:
    """A real-weighted sum of Pauli strings with canonical term order.

    Terms are stored as parallel numpy arrays of masks and weights, sorted
    by ``(x_mask, z_mask)``, which fixes iteration and serialization order.
    Instances are immutable; all operations return new sums.
    """

    __slots__ = ("q", "_xs", "_zs", "_ws", "_lookup")

    def __init__(self, q: int, xs: np.ndarray, zs: np.ndarray, ws: np.ndarray):
        if q < 1:
            raise ValueError(f"qubit count must be positive, got {q}")
        if q > MAX_QUBITS:
            raise ValueError(f"qubit counts above {MAX_QUBITS} are not supported, got {q}")
        self.q = q
        self._xs = xs
        self._zs = zs
        self._ws = ws
        self._lookup: dict[tuple[int, int], float] | None = None
        for arr in (xs, zs, ws):
            arr.setflags(write=False)

    # -- construction ---------------------------------------------------

    @classmethod
    def from_terms(
        cls,
        q: int,
        terms: Iterable[tuple[complex, PauliString]],
        tol: float = DEFAULT_TOL,
    ) -> "WeightedPauliSum":
        """Accumulate ``(weight, string)`` pairs into a compressed sum.

        Duplicate strings are merged.  Imaginary residues above
        :data:`IMAG_TOL` raise; below, they are dropped.  Terms with
        ``|weight| <= tol`` are removed.
        """
        acc: dict[tuple[int, int], complex] = {}
        for w, p in terms:
            if p.q != q:
                raise QubitMismatchError(
                    f"term on {p.q} qubits in a sum over {q} qubits"
                )
            key = (p.x_mask, p.z_mask)
            acc[key] = acc.get(key, 0.0) + complex(w)
        xs = []
        zs = []
        ws = []
        for (x, z), w in acc.items():
            if abs(w.imag) > IMAG_TOL:
                raise ImaginaryResidueError(
                    f"imaginary residue {w.imag:.3e} above {IMAG_TOL:g} on "
                    f"string {PauliString(q, x, z).label}"
                )
            if abs(w.real) > tol:
                xs.append(x)
                zs.append(z)
                ws.append(w.real)
        return cls._from_unsorted(
            q,
            np.array(xs, dtype=np.uint64),
            np.array(zs, dtype=np.uint64),
            np.array(ws, dtype=np.float64),
        )

    @classmethod
    def _from_unsorted(
        cls, q: int, xs: np.ndarray, zs: np.ndarray, ws: np.ndarray
    ) -> "WeightedPauliSum":
        order = np.lexsort((zs, xs))
        return cls(q, xs[order], zs[order], ws[order])

    # -- access ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self._ws)

    def __iter__(self) -> Iterator[tuple[PauliString, float]]:
        for x, z, w in zip(self._xs, self._zs, self._ws):
            yield PauliString(self.q, int(x), int(z)), float(w)

    def strings(self) -> list[PauliString]:
        return [p for p, _ in self]

    def masks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """The raw ``(xs, zs, ws)`` arrays (read-only views)."""
        return self._xs, self._zs, self._ws

    def get(self, p: PauliString, default: float | None = None) -> float | None:
        if self._lookup is None:
            self._lookup = {
                (int(x), int(z)): float(w)
                for x, z, w in zip(self._xs, self._zs, self._ws)
            }
        return self._lookup.get((p.x_mask, p.z_mask), default)

    def __contains__(self, p: PauliString) -> bool:
        return self.get(p) is not None

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedPauliSum):
            return NotImplemented
        return (
            self.q == other.q
            and np.array_equal(self._xs, other._xs)
            and np.array_equal(self._zs, other._zs)
            and np.array_equal(self._ws, other._ws)
        )

    def __repr__(self) -> str:
        return f"WeightedPauliSum(q={self.q}, terms={len(self)})"

    def allclose(self, other: "WeightedPauliSum", tol: float = 1e-12) -> bool:
        return (
            self.q == other.q
            and np.array_equal(self._xs, other._xs)
            and np.array_equal(self._zs, other._zs)
            and bool(np.allclose(self._ws, other._ws, rtol=0.0, atol=tol))
        )

    # -- serialization --------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "terms": [
                {"string": p.label, "weight": float(w)} for p, w in self
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "WeightedPauliSum":
        q = int(data["q"])
        terms = [
            (float(t["weight"]), PauliString.from_label(t["string"]))
            for t in data["terms"]
        ]
        for _, p in terms:
            if p.q != q:
                raise QubitMismatchError(
                    f"term {p.label!r} does not act on {q} qubits"
                )
        return cls.from_terms(q, terms, tol=0.0)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "WeightedPauliSum":
        return cls.from_json_dict(json.loads(text))


def sum_compress(
    q: int,
    raw_terms: Iterable[tuple[complex, PauliString]],
    tol: float = DEFAULT_TOL,
) -> WeightedPauliSum:
    """Merge duplicate strings and drop negligible terms.

    Convenience alias for :meth:`WeightedPauliSum.from_terms`.
    """
    return WeightedPauliSum.from_terms(q, raw_terms, tol=tol)


def _multiply(a: WeightedPauliSum, b: WeightedPauliSum, tol: float) -> WeightedPauliSum:
    if a.q != b.q:
        raise QubitMismatchError(f"cannot multiply sums on {a.q} and {b.q} qubits")
    ax, az, aw = a.masks()
    bx, bz, bw = b.masks()
    xs, zs, ws, max_imag = kernels.expand_product(ax, az, aw, bx, bz, bw, tol)
    if max_imag > IMAG_TOL:
        raise ImaginaryResidueError(
            f"imaginary residue {max_imag:.3e} above {IMAG_TOL:g} in sum product"
        )
    return WeightedPauliSum._from_unsorted(a.q, xs, zs, ws)


def hamiltonian_power(
    h: WeightedPauliSum, n: int, tol: float = DEFAULT_TOL
) -> WeightedPauliSum:
    """The compressed expansion of ``H**n`` in the Pauli basis.

    ``n = 0`` gives the identity sum and ``n = 1`` returns ``h`` itself
    unchanged.  Higher powers multiply level by level, compressing after
    each multiplication.
    """
    return hamiltonian_powers(h, n, tol)[n]


def hamiltonian_powers(
    h: WeightedPauliSum, nmax: int, tol: float = DEFAULT_TOL
) -> list[WeightedPauliSum]:
    """All powers ``[H**0, H**1, ..., H**nmax]``, computed level by level.

    Each level is compressed before the next multiplication, so every
    intermediate power is available for per-order measurement grouping.
    """
    if nmax < 0:
        raise ValueError(f"power must be non-negative, got {nmax}")
    identity = WeightedPauliSum(
        h.q,
        np.zeros(1, dtype=np.uint64),
        np.zeros(1, dtype=np.uint64),
        np.ones(1, dtype=np.float64),
    )
    levels = [identity]
    if nmax >= 1:
        levels.append(h)
    for _ in range(2, nmax + 1):
        levels.append(_multiply(levels[-1], h, tol))
    return levels
