"""Lattice models, couplings, and the pairwise trial-state specification.

The Hamiltonian family is an antiferromagnetic Heisenberg model on a graph,
normalized per qubit:

    H = (1/q) * sum over edges (i, j) of
        jx X_i X_j + jy Y_i Y_j + jz Z_i Z_j

Supported graphs: open chains, rectangular grids, and heavy-honeycomb rows
(a row of hexagons with every edge subdivided by an extra vertex).  Grid
vertices are numbered in boustrophedon (snake) row order, so qubits that are
adjacent along the numbering are also adjacent on the lattice and the
parity of the qubit index gives a proper 2-coloring.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .errors import QubitMismatchError
from .pauli import PauliString, WeightedPauliSum
from .rng import stream

__all__ = [
    "LatticeGraph",
    "CouplingSet",
    "TrialStateSpec",
    "build_lattice",
    "build_hamiltonian",
    "sample_couplings",
    "generic_couplings",
    "model_to_json_dict",
    "model_from_json_dict",
]

LATTICE_KINDS = ("chain", "square", "heavy-honeycomb")


@dataclass(frozen=True)
class LatticeGraph:
    """An undirected graph with a fixed, sorted edge list."""

    kind: str
    dims: tuple[int, ...]
    q: int
    edges: tuple[tuple[int, int], ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def layout(self) -> np.ndarray:
        """Planar ``(row, col)`` coordinates per site.

        Square lattices unfold the snake ordering back onto the grid; other
        kinds fall back to a single line in site order.
        """
        if self.kind == "square":
            rows, cols = self.dims
            coords = np.empty((self.q, 2), dtype=np.int64)
            for r in range(rows):
                for c in range(cols):
                    coords[_snake_index(r, c, cols)] = (r, c)
            return coords
        line = np.arange(self.q, dtype=np.int64)
        return np.stack([np.zeros_like(line), line], axis=1)


def _chain(q: int) -> tuple[tuple[int, int], ...]:
    if q < 2:
        raise ValueError(f"chain needs at least 2 sites, got {q}")
    return tuple((i, i + 1) for i in range(q - 1))


def _snake_index(row: int, col: int, cols: int) -> int:
    if row % 2 == 0:
        return row * cols + col
    return row * cols + (cols - 1 - col)


def _square(rows: int, cols: int) -> tuple[tuple[int, int], ...]:
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError(f"invalid grid dimensions {rows}x{cols}")
    edges = set()
    for r in range(rows):
        for c in range(cols):
            a = _snake_index(r, c, cols)
            if c + 1 < cols:
                b = _snake_index(r, c + 1, cols)
                edges.add((min(a, b), max(a, b)))
            if r + 1 < rows:
                b = _snake_index(r + 1, c, cols)
                edges.add((min(a, b), max(a, b)))
    return tuple(sorted(edges))


def _heavy_honeycomb(cells: int) -> tuple[int, tuple[tuple[int, int], ...]]:
    """A row of ``cells`` hexagons, every edge subdivided.

    Corner vertices form two paths of 2*cells + 1 sites (top: 0..2c, bottom:
    2c+1..4c+1) joined by rungs at every even column; subdivision vertices
    are appended in base-edge order.
    """
    if cells < 1:
        raise ValueError(f"need at least one hexagonal cell, got {cells}")
    top = list(range(2 * cells + 1))
    bottom = list(range(2 * cells + 1, 4 * cells + 2))
    base_edges = []
    for i in range(2 * cells):
        base_edges.append((top[i], top[i + 1]))
    for i in range(2 * cells):
        base_edges.append((bottom[i], bottom[i + 1]))
    for i in range(0, 2 * cells + 1, 2):
        base_edges.append((top[i], bottom[i]))
    next_vertex = 4 * cells + 2
    edges = []
    for u, v in base_edges:
        w = next_vertex
        next_vertex += 1
        edges.append((min(u, w), max(u, w)))
        edges.append((min(v, w), max(v, w)))
    return next_vertex, tuple(sorted(edges))


def build_lattice(kind: str, dims: tuple[int, ...] | int) -> LatticeGraph:
    """Construct a lattice graph.

    * ``chain``: ``dims = (q,)``
    * ``square``: ``dims = (rows, cols)``
    * ``heavy-honeycomb``: ``dims = (cells,)``, giving ``q = 9*cells + 3``
    """
    if isinstance(dims, int):
        dims = (dims,)
    dims = tuple(int(d) for d in dims)
    if kind == "chain":
        (q,) = dims
        return LatticeGraph("chain", dims, q, _chain(q))
    if kind == "square":
        rows, cols = dims
        return LatticeGraph("square", dims, rows * cols, _square(rows, cols))
    if kind == "heavy-honeycomb":
        (cells,) = dims
        q, edges = _heavy_honeycomb(cells)
        return LatticeGraph("heavy-honeycomb", dims, q, edges)
    raise ValueError(f"unknown lattice kind {kind!r} (expected one of {LATTICE_KINDS})")


@dataclass(frozen=True)
class CouplingSet:
    """Per-edge ``(jx, jy, jz)`` couplings aligned with a graph's edge list."""

    values: tuple[tuple[float, float, float], ...]

    @classmethod
    def uniform(cls, graph: LatticeGraph, j: float = 1.0) -> "CouplingSet":
        return cls(tuple((j, j, j) for _ in graph.edges))

    def __len__(self) -> int:
        return len(self.values)

    def digest_text(self) -> str:
        """Canonical text form used for hashing instance couplings."""
        return ";".join(
            f"{jx:.17g},{jy:.17g},{jz:.17g}" for jx, jy, jz in self.values
        )


def sample_couplings(graph: LatticeGraph, seed: int) -> CouplingSet:
    """Draw random couplings, each uniform on {0.000, 0.001, ..., 0.999}.

    The draw is keyed by ``seed`` alone, so the same seed always yields the
    same coupling set for a given graph.
    """
    rng = stream(seed, "couplings")
    grid = rng.integers(0, 1000, size=(graph.edge_count, 3))
    return CouplingSet(
        tuple(
            (int(a) / 1000.0, int(b) / 1000.0, int(c) / 1000.0)
            for a, b, c in grid
        )
    )


def generic_couplings(graph: LatticeGraph, seed: int) -> CouplingSet:
    """Full-precision uniform couplings on (0, 1), for building superset
    string bases: with continuous values, accidental cancellations that
    could shrink the expansion's string set have probability zero."""
    rng = stream(seed, "generic-couplings")
    vals = rng.random((graph.edge_count, 3))
    return CouplingSet(tuple((float(a), float(b), float(c)) for a, b, c in vals))


def build_hamiltonian(graph: LatticeGraph, couplings: CouplingSet) -> WeightedPauliSum:
    """Assemble the per-qubit-normalized Heisenberg Hamiltonian.

    Terms with an exactly zero coupling are dropped.
    """
    if len(couplings) != graph.edge_count:
        raise QubitMismatchError(
            f"{len(couplings)} coupling triples for {graph.edge_count} edges"
        )
    q = graph.q
    terms = []
    for (i, j), (jx, jy, jz) in zip(graph.edges, couplings.values):
        pair = (1 << i) | (1 << j)
        if jx != 0.0:
            terms.append((jx / q, PauliString(q, pair, 0)))
        if jy != 0.0:
            terms.append((jy / q, PauliString(q, pair, pair)))
        if jz != 0.0:
            terms.append((jz / q, PauliString(q, 0, pair)))
    return WeightedPauliSum.from_terms(q, terms, tol=0.0)


@dataclass(frozen=True)
class TrialStateSpec:
    """Pairwise-entangled product trial state.

    Qubits are paired along the numbering, ``(0, 1), (2, 3), ...``; each
    pair carries ``cos(theta/2)|10> + sin(theta/2)|01>``, and a leftover
    qubit on odd ``q`` stays in ``|0>``.  At ``theta = pi`` this is the
    Neel state ``|0101...>``.
    """

    q: int
    theta: float

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"qubit count must be positive, got {self.q}")
        if not (0.0 <= self.theta <= 2.0 * pi):
            raise ValueError(f"theta must lie in [0, 2*pi], got {self.theta}")

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((2 * k, 2 * k + 1) for k in range(self.q // 2))

    @property
    def lone_qubit(self) -> int | None:
        return self.q - 1 if self.q % 2 else None


def model_to_json_dict(graph: LatticeGraph, couplings: CouplingSet | None = None) -> dict:
    out = {
        "kind": graph.kind,
        "dims": list(graph.dims),
        "q": graph.q,
        "edges": [list(e) for e in graph.edges],
    }
    if couplings is not None:
        if len(couplings) != graph.edge_count:
            raise QubitMismatchError(
                f"{len(couplings)} coupling triples for {graph.edge_count} edges"
            )
        out["couplings"] = [list(v) for v in couplings.values]
    return out


def model_from_json_dict(data: dict) -> tuple[LatticeGraph, CouplingSet | None]:
    graph = build_lattice(data["kind"], tuple(data["dims"]))
    stored = [tuple(e) for e in data["edges"]]
    if stored != list(graph.edges) or int(data["q"]) != graph.q:
        raise ValueError("stored lattice does not match its kind and dims")
    couplings = None
    if "couplings" in data:
        couplings = CouplingSet(
            tuple((float(a), float(b), float(c)) for a, b, c in data["couplings"])
        )
        if len(couplings) != graph.edge_count:
            raise QubitMismatchError(
                f"{len(couplings)} coupling triples for {graph.edge_count} edges"
            )
    return graph, couplings
