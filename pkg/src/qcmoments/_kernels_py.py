"""Pure-Python reference implementations of the hot kernels.

These mirror the compiled versions in ``_kernels`` exactly: same accumulation
order, same tolerance handling, same outputs.  They are selected when the
extension is unavailable (or via ``QCM_PURE_PYTHON=1``) and they back the
kernel benchmark.  Expect them to be orders of magnitude slower on large
lattices.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# i**k for k = 0..3, as (real, imag) accumulation selectors.
_PHASE_RE = (1.0, 0.0, -1.0, 0.0)
_PHASE_IM = (0.0, 1.0, 0.0, -1.0)


def expand_product(xs_a, zs_a, ws_a, xs_b, zs_b, ws_b, tol):
    """Multiply two real-weighted Pauli sums given as mask/weight arrays.

    Returns ``(xs, zs, ws, max_imag)`` with like terms merged, terms of
    absolute weight <= tol dropped, and ``max_imag`` the largest imaginary
    residue accumulated on any product string (before dropping).  Output
    order is unspecified; callers sort.
    """
    na = len(xs_a)
    nb = len(xs_b)
    ax = [int(v) for v in xs_a]
    az = [int(v) for v in zs_a]
    aw = [float(v) for v in ws_a]
    bx = [int(v) for v in xs_b]
    bz = [int(v) for v in zs_b]
    bw = [float(v) for v in ws_b]
    pa = [(ax[i] & az[i]).bit_count() for i in range(na)]
    pb = [(bx[j] & bz[j]).bit_count() for j in range(nb)]

    acc: dict[tuple[int, int], list[float]] = {}
    for i in range(na):
        xi = ax[i]
        zi = az[i]
        wi = aw[i]
        ki = pa[i]
        for j in range(nb):
            x = xi ^ bx[j]
            z = zi ^ bz[j]
            k = (ki + pb[j] + 2 * (zi & bx[j]).bit_count() - (x & z).bit_count()) & 3
            w = wi * bw[j]
            cell = acc.get((x, z))
            if cell is None:
                cell = [0.0, 0.0]
                acc[(x, z)] = cell
            cell[0] += w * _PHASE_RE[k]
            cell[1] += w * _PHASE_IM[k]

    max_imag = 0.0
    out_x = []
    out_z = []
    out_w = []
    for (x, z), (re, im) in acc.items():
        if abs(im) > max_imag:
            max_imag = abs(im)
        if abs(re) > tol:
            out_x.append(x)
            out_z.append(z)
            out_w.append(re)

    return (
        np.array(out_x, dtype=np.uint64),
        np.array(out_z, dtype=np.uint64),
        np.array(out_w, dtype=np.float64),
        max_imag,
    )


def group_first_fit(xs, zs, q):
    """Greedy first-fit assignment of pre-sorted strings into TPB groups.

    ``xs``/``zs`` must already be sorted by the grouping order (descending
    support size, then letter sequence).  Returns ``(assign, label_x,
    label_z)`` where ``assign[i]`` is the group index of string ``i`` and the
    label arrays hold each group's accumulated measurement basis.
    """
    n = len(xs)
    assign = np.empty(n, dtype=np.int64)
    lab_x: list[int] = []
    lab_z: list[int] = []

    for i in range(n):
        x = int(xs[i])
        z = int(zs[i])
        sup = x | z
        found = -1
        for g in range(len(lab_x)):
            lx = lab_x[g]
            lz = lab_z[g]
            if ((lx ^ x) | (lz ^ z)) & (lx | lz) & sup == 0:
                found = g
                break
        if found < 0:
            lab_x.append(x)
            lab_z.append(z)
            assign[i] = len(lab_x) - 1
        else:
            ext = sup & ~(lab_x[found] | lab_z[found])
            if ext:
                lab_x[found] |= x & ext
                lab_z[found] |= z & ext
            assign[i] = found

    return (
        assign,
        np.array(lab_x, dtype=np.uint64),
        np.array(lab_z, dtype=np.uint64),
    )
