"""Tensor-product-basis grouping of qubit-wise commuting Pauli strings.

Two strings are qubit-wise commuting (QWC) when, on every qubit where both
are non-identity, their letters agree.  A group of mutually QWC strings can
be measured in one tensor-product basis, its label: the union of member
letters, one non-identity letter per covered qubit.

The assignment is a deterministic greedy pass: each string, taken in a
fixed sort order, joins the first existing group whose label it is
compatible with (extending that label over the string's support) or opens
a new group.  The sort order controls how well labels get reused, so it is
chosen to bring translated copies of the same local letter pattern
together: strings are keyed by descending support size, then descending
multiplicity of their translation class on the site grid, then the class's
canonical letter grid (shifted so its bounding box starts at the origin,
letters ranked I < X < Y < Z), then the string's phase relative to a tiling
by that bounding box, then its absolute position.  Consecutive strings are
then translates of one pattern, visited stride-by-stride, so the greedy
pass fills each group with a non-overlapping tiling before opening the
next; one tiled label then also absorbs many later, smaller strings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import QubitMismatchError
from .models import build_lattice, build_hamiltonian, CouplingSet
from .pauli import PauliString, WeightedPauliSum, hamiltonian_power, DEFAULT_TOL

__all__ = [
    "qwc",
    "label_covers",
    "TPBGroup",
    "group_tpb",
    "group_masks",
    "grouping_sort_order",
    "scaling_report",
    "scaling_report_csv",
    "groups_to_json_dict",
    "groups_from_json_dict",
]


def qwc(a: PauliString, b: PauliString) -> bool:
    """Qubit-wise commutation test."""
    if a.q != b.q:
        raise QubitMismatchError(f"strings on {a.q} and {b.q} qubits")
    differ = (a.x_mask ^ b.x_mask) | (a.z_mask ^ b.z_mask)
    return differ & (a.x_mask | a.z_mask) & (b.x_mask | b.z_mask) == 0


def label_covers(label: PauliString, member: PauliString) -> bool:
    """True when the label determines the member: letters agree everywhere
    the member is non-identity."""
    if label.q != member.q:
        raise QubitMismatchError(f"strings on {label.q} and {member.q} qubits")
    differ = (label.x_mask ^ member.x_mask) | (label.z_mask ^ member.z_mask)
    return differ & (member.x_mask | member.z_mask) == 0


@dataclass(frozen=True)
class TPBGroup:
    """A measurement group: shared basis label plus member strings."""

    label: PauliString
    members: tuple[PauliString, ...]


_KEY_CHUNK = 1 << 20


def _line_layout(q: int) -> np.ndarray:
    line = np.arange(q, dtype=np.int64)
    return np.stack([np.zeros_like(line), line], axis=1)


def _canonical_keys(
    xs: np.ndarray, zs: np.ndarray, q: int, layout: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Translation-canonical sort keys for each string.

    Letters are placed on the site grid given by ``layout`` (per-qubit
    ``(row, col)`` coordinates), the grid is cyclically shifted so the
    pattern's bounding box starts at the origin, and the shifted letter
    ranks (I=0 < X=1 < Y=2 < Z=3) are packed row-major into two uint64
    words, first cell most significant.  All translates of one pattern
    share the packed word.  Returns ``(hi, lo, pos_res)`` where ``pos_res``
    encodes the tile phase (offset modulo the bounding box) and position of
    the string's bounding box, phase-major.

    Work is chunked so peak memory stays proportional to the chunk size,
    not the string count.
    """
    n = len(xs)
    rows = int(layout[:, 0].max()) + 1
    cols = int(layout[:, 1].max()) + 1
    cell_of = layout[:, 0] * cols + layout[:, 1]
    half = (q + 1) // 2
    hi = np.zeros(n, dtype=np.uint64)
    lo = np.zeros(n, dtype=np.uint64)
    pos_res = np.zeros(n, dtype=np.int64)
    bits = np.arange(q, dtype=np.uint64)
    for start in range(0, n, _KEY_CHUNK):
        sl = slice(start, min(start + _KEY_CHUNK, n))
        m = sl.stop - sl.start
        xb = ((xs[sl, None] >> bits[None, :]) & np.uint64(1)).astype(np.uint8)
        zb = ((zs[sl, None] >> bits[None, :]) & np.uint64(1)).astype(np.uint8)
        rank = (xb ^ zb) + 2 * zb
        grid = np.zeros((m, rows * cols), dtype=np.uint8)
        grid[:, cell_of] = rank
        grid = grid.reshape(m, rows, cols)
        occ_r = grid.any(axis=2)
        occ_c = grid.any(axis=1)
        minr = np.argmax(occ_r, axis=1)
        minc = np.argmax(occ_c, axis=1)
        maxr = rows - 1 - np.argmax(occ_r[:, ::-1], axis=1)
        maxc = cols - 1 - np.argmax(occ_c[:, ::-1], axis=1)
        rr = (np.arange(rows)[None, :, None] + minr[:, None, None]) % rows
        cc = (np.arange(cols)[None, None, :] + minc[:, None, None]) % cols
        canon = grid[np.arange(m)[:, None, None], rr, cc].reshape(m, -1)
        chi = np.zeros(m, dtype=np.uint64)
        clo = np.zeros(m, dtype=np.uint64)
        for cell in range(q):
            v = canon[:, cell].astype(np.uint64)
            if cell < half:
                chi |= v << np.uint64(2 * (half - 1 - cell))
            else:
                clo |= v << np.uint64(2 * (q - 1 - cell))
        hi[sl] = chi
        lo[sl] = clo
        res = (minr % (maxr - minr + 1)) * cols + minc % (maxc - minc + 1)
        pos_res[sl] = res * (rows * cols) + minr * cols + minc
    return hi, lo, pos_res


def _class_sizes(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """Multiplicity of each string's (hi, lo) translation class."""
    n = len(hi)
    order = np.lexsort((lo, hi))
    shi, slo = hi[order], lo[order]
    new = np.empty(n, dtype=bool)
    new[0] = True
    new[1:] = (shi[1:] != shi[:-1]) | (slo[1:] != slo[:-1])
    class_sorted = np.cumsum(new) - 1
    counts = np.bincount(class_sorted)
    class_of = np.empty(n, dtype=np.int64)
    class_of[order] = class_sorted
    return counts[class_of]


def grouping_sort_order(
    xs: np.ndarray, zs: np.ndarray, q: int, layout: np.ndarray | None = None
) -> np.ndarray:
    """Permutation sorting strings for the greedy pass.

    Keys, most significant first: support size descending, translation-class
    multiplicity descending, canonical letter grid ascending, tile phase,
    then position.  ``layout`` gives per-qubit grid coordinates; a single
    line is assumed when omitted.
    """
    if layout is None:
        layout = _line_layout(q)
    support = np.bitwise_count(xs | zs).astype(np.int64)
    hi, lo, pos_res = _canonical_keys(xs, zs, q, layout)
    csize = _class_sizes(hi, lo)
    return np.lexsort((pos_res, lo, hi, -csize, -support))


def group_masks(
    xs: np.ndarray, zs: np.ndarray, q: int, layout: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Array-level grouping.

    Returns ``(order, assign, label_x, label_z)``: the sort permutation,
    the group index of each sorted string, and the group label masks in
    creation order.
    """
    order = grouping_sort_order(xs, zs, q, layout)
    assign, label_x, label_z = kernels.group_first_fit(xs[order], zs[order], q)
    return order, assign, label_x, label_z


def group_tpb(
    strings: Iterable[PauliString], layout: np.ndarray | None = None
) -> list[TPBGroup]:
    """Group distinct strings into tensor-product bases.

    Output is deterministic: groups appear in creation order, members in
    processing order.  ``layout`` optionally gives per-qubit grid
    coordinates to the sort order.
    """
    materialized = list(strings)
    if not materialized:
        return []
    q = materialized[0].q
    for p in materialized:
        if p.q != q:
            raise QubitMismatchError("strings act on different qubit counts")
    xs = np.array([p.x_mask for p in materialized], dtype=np.uint64)
    zs = np.array([p.z_mask for p in materialized], dtype=np.uint64)
    order, assign, label_x, label_z = group_masks(xs, zs, q, layout)

    n_groups = len(label_x)
    members: list[list[PauliString]] = [[] for _ in range(n_groups)]
    for i, g in enumerate(assign):
        members[g].append(materialized[order[i]])
    return [
        TPBGroup(
            PauliString(q, int(label_x[g]), int(label_z[g])),
            tuple(members[g]),
        )
        for g in range(n_groups)
    ]


# -- scaling ---------------------------------------------------------------


def _dims_for(family: str, q: int) -> tuple[int, ...]:
    if family == "chain":
        return (q,)
    if family == "square":
        side = round(q ** 0.5)
        if side * side != q:
            raise ValueError(f"square family needs a perfect-square q, got {q}")
        return (side, side)
    if family == "heavy-honeycomb":
        if (q - 3) % 9 != 0 or q < 12:
            raise ValueError(f"heavy-honeycomb family needs q = 9*cells + 3, got {q}")
        return ((q - 3) // 9,)
    raise ValueError(f"unknown lattice family {family!r}")


def scaling_report(
    family: str,
    q_values: Sequence[int],
    n: int = 4,
    tol: float = DEFAULT_TOL,
) -> list[dict]:
    """Count compressed H**n strings before and after grouping.

    Uses uniform couplings J = 1.  Returns one row per q:
    ``{"q": q, "raw": string count, "groups": group count}``.
    """
    rows = []
    for q in q_values:
        graph = build_lattice(family, _dims_for(family, q))
        h = build_hamiltonian(graph, CouplingSet.uniform(graph))
        hn = hamiltonian_power(h, n, tol)
        xs, zs, _ = hn.masks()
        _, _, label_x, _ = group_masks(xs, zs, graph.q, graph.layout())
        rows.append({"q": int(q), "raw": len(hn), "groups": len(label_x)})
    return rows


def scaling_report_csv(rows: Sequence[dict]) -> str:
    lines = ["q,raw,groups"]
    for row in rows:
        lines.append(f"{row['q']},{row['raw']},{row['groups']}")
    return "\n".join(lines) + "\n"


# -- serialization -----------------------------------------------------------


def groups_to_json_dict(n: int, groups: Sequence[TPBGroup]) -> dict:
    return {
        "n": int(n),
        "groups": [
            {
                "label": g.label.label,
                "members": [m.label for m in g.members],
            }
            for g in groups
        ],
    }


def groups_from_json_dict(data: dict) -> tuple[int, list[TPBGroup]]:
    n = int(data["n"])
    groups = []
    for g in data["groups"]:
        label = PauliString.from_label(g["label"])
        members = tuple(PauliString.from_label(m) for m in g["members"])
        for m in members:
            if not label_covers(label, m):
                raise ValueError(
                    f"member {m.label} incompatible with group label {label.label}"
                )
        groups.append(TPBGroup(label, members))
    return n, groups
