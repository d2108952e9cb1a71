# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Two routines dominate large-lattice runs and are implemented here in C speed:

``expand_product``
    Multiplies two real-weighted Pauli sums over symplectic bit masks,
    merging like product strings in an open-addressing hash table.  Real and
    imaginary parts are accumulated separately so phase bookkeeping can be
    audited; the caller receives the largest imaginary residue seen.

``group_first_fit``
    Greedy first-fit assignment of strings into qubit-wise commuting groups.
    Instead of scanning group labels one by one, per-qubit bitmaps of group
    indices are intersected word by word, which finds the first compatible
    group in creation order while touching a small fraction of the labels.

Semantics (including accumulation order, which fixes the floating-point
results bit for bit) match ``_kernels_py``.
"""

from libc.stdlib cimport calloc, free, malloc, realloc
from libc.string cimport memcpy
from libc.stdint cimport int64_t, uint8_t, uint64_t

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define QCM_POPCNT(x) __builtin_popcountll(x)
    #define QCM_CTZ(x) __builtin_ctzll(x)
    #else
    static int QCM_POPCNT(unsigned long long v)
    { int c = 0; while (v) { v &= v - 1; ++c; } return c; }
    static int QCM_CTZ(unsigned long long v)
    { int c = 0; while (!(v & 1ULL)) { v >>= 1; ++c; } return c; }
    #endif
    """
    int QCM_POPCNT(uint64_t x) nogil
    int QCM_CTZ(uint64_t x) nogil


cdef inline uint64_t _hash_key(uint64_t x, uint64_t z) nogil:
    cdef uint64_t h = x * <uint64_t>0x9E3779B97F4A7C15ULL
    h ^= z * <uint64_t>0xC2B2AE3D27D4EB4FULL
    h ^= h >> 33
    h *= <uint64_t>0xFF51AFD7ED558CCDULL
    h ^= h >> 33
    return h


cdef struct _Table:
    uint64_t *tx
    uint64_t *tz
    double *tre
    double *tim
    uint8_t *occ
    uint64_t cap
    uint64_t mask
    uint64_t count


cdef int _table_init(_Table *t, uint64_t cap) nogil:
    t.tx = <uint64_t *>malloc(cap * sizeof(uint64_t))
    t.tz = <uint64_t *>malloc(cap * sizeof(uint64_t))
    t.tre = <double *>calloc(cap, sizeof(double))
    t.tim = <double *>calloc(cap, sizeof(double))
    t.occ = <uint8_t *>calloc(cap, sizeof(uint8_t))
    if t.tx == NULL or t.tz == NULL or t.tre == NULL or t.tim == NULL or t.occ == NULL:
        return -1
    t.cap = cap
    t.mask = cap - 1
    t.count = 0
    return 0


cdef void _table_free(_Table *t) nogil:
    free(t.tx)
    free(t.tz)
    free(t.tre)
    free(t.tim)
    free(t.occ)
    t.tx = NULL
    t.tz = NULL
    t.tre = NULL
    t.tim = NULL
    t.occ = NULL


cdef int _table_grow(_Table *t) nogil:
    """Rehash into a larger table.  Growth is x4 while small, x2 once the
    table is large enough that a x4 step would dominate peak memory."""
    cdef _Table fresh
    cdef uint64_t new_cap = t.cap * 4 if t.cap < (<uint64_t>1 << 24) else t.cap * 2
    cdef uint64_t i, slot
    if _table_init(&fresh, new_cap) != 0:
        return -1
    for i in range(t.cap):
        if t.occ[i]:
            slot = _hash_key(t.tx[i], t.tz[i]) & fresh.mask
            while fresh.occ[slot]:
                slot = (slot + 1) & fresh.mask
            fresh.occ[slot] = 1
            fresh.tx[slot] = t.tx[i]
            fresh.tz[slot] = t.tz[i]
            fresh.tre[slot] = t.tre[i]
            fresh.tim[slot] = t.tim[i]
    fresh.count = t.count
    _table_free(t)
    t[0] = fresh
    return 0


cdef inline int _table_add(_Table *t, uint64_t x, uint64_t z,
                           double re, double im) nogil:
    cdef uint64_t slot = _hash_key(x, z) & t.mask
    while True:
        if not t.occ[slot]:
            # Keep the load factor below 0.7; grow before inserting.
            if (t.count + 1) * 10 > t.cap * 7:
                if _table_grow(t) != 0:
                    return -1
                slot = _hash_key(x, z) & t.mask
                while t.occ[slot]:
                    if t.tx[slot] == x and t.tz[slot] == z:
                        t.tre[slot] += re
                        t.tim[slot] += im
                        return 0
                    slot = (slot + 1) & t.mask
            t.occ[slot] = 1
            t.tx[slot] = x
            t.tz[slot] = z
            t.tre[slot] = re
            t.tim[slot] = im
            t.count += 1
            return 0
        if t.tx[slot] == x and t.tz[slot] == z:
            t.tre[slot] += re
            t.tim[slot] += im
            return 0
        slot = (slot + 1) & t.mask


def expand_product(object xs_a, object zs_a, object ws_a,
                   object xs_b, object zs_b, object ws_b,
                   double tol):
    """Merge-multiply two mask/weight sums; see the module docstring."""
    cdef const uint64_t[::1] ax = np.ascontiguousarray(xs_a, dtype=np.uint64)
    cdef const uint64_t[::1] az = np.ascontiguousarray(zs_a, dtype=np.uint64)
    cdef const double[::1] aw = np.ascontiguousarray(ws_a, dtype=np.float64)
    cdef const uint64_t[::1] bx = np.ascontiguousarray(xs_b, dtype=np.uint64)
    cdef const uint64_t[::1] bz = np.ascontiguousarray(zs_b, dtype=np.uint64)
    cdef const double[::1] bw = np.ascontiguousarray(ws_b, dtype=np.float64)

    cdef Py_ssize_t na = ax.shape[0]
    cdef Py_ssize_t nb = bx.shape[0]
    cdef _Table t
    # Presize from the trivial bound on distinct products, capped at 2^25
    # slots (1 GiB of table); the table still grows if that proves short.
    cdef uint64_t want = 1024
    cdef uint64_t bound
    if na > 0 and nb > 0:
        bound = (<uint64_t>na * <uint64_t>nb) * 10 // 7
        if bound > (<uint64_t>1 << 25):
            bound = <uint64_t>1 << 25
        while want < bound:
            want *= 2
    cdef uint64_t cap = want
    cdef int failed = 0
    cdef Py_ssize_t i, j
    cdef uint64_t xi, zi, x, z
    cdef double wi, w
    cdef int ki, k
    cdef int *pb = NULL

    if _table_init(&t, cap) != 0:
        raise MemoryError("product table allocation failed")

    with nogil:
        pb = <int *>malloc(nb * sizeof(int)) if nb > 0 else <int *>malloc(sizeof(int))
        if pb == NULL:
            failed = 1
        else:
            for j in range(nb):
                pb[j] = QCM_POPCNT(bx[j] & bz[j])
            for i in range(na):
                xi = ax[i]
                zi = az[i]
                wi = aw[i]
                ki = QCM_POPCNT(xi & zi)
                for j in range(nb):
                    x = xi ^ bx[j]
                    z = zi ^ bz[j]
                    k = (ki + pb[j] + 2 * QCM_POPCNT(zi & bx[j])
                         + 256 - QCM_POPCNT(x & z)) & 3
                    w = wi * bw[j]
                    if k == 0:
                        failed = _table_add(&t, x, z, w, 0.0)
                    elif k == 1:
                        failed = _table_add(&t, x, z, 0.0, w)
                    elif k == 2:
                        failed = _table_add(&t, x, z, -w, 0.0)
                    else:
                        failed = _table_add(&t, x, z, 0.0, -w)
                    if failed:
                        break
                if failed:
                    break
        free(pb)

    if failed:
        _table_free(&t)
        raise MemoryError("product table allocation failed")

    cdef double max_imag = 0.0
    cdef uint64_t n_keep = 0
    cdef uint64_t s
    with nogil:
        for s in range(t.cap):
            if t.occ[s]:
                if t.tim[s] > max_imag:
                    max_imag = t.tim[s]
                elif -t.tim[s] > max_imag:
                    max_imag = -t.tim[s]
                if t.tre[s] > tol or -t.tre[s] > tol:
                    n_keep += 1

    out_x = np.empty(n_keep, dtype=np.uint64)
    out_z = np.empty(n_keep, dtype=np.uint64)
    out_w = np.empty(n_keep, dtype=np.float64)
    cdef uint64_t[::1] ox = out_x
    cdef uint64_t[::1] oz = out_z
    cdef double[::1] ow = out_w
    cdef uint64_t pos = 0
    with nogil:
        for s in range(t.cap):
            if t.occ[s] and (t.tre[s] > tol or -t.tre[s] > tol):
                ox[pos] = t.tx[s]
                oz[pos] = t.tz[s]
                ow[pos] = t.tre[s]
                pos += 1
    _table_free(&t)
    return out_x, out_z, out_w, max_imag


def group_first_fit(object xs, object zs, int q):
    """Greedy first-fit TPB assignment of pre-sorted strings."""
    cdef const uint64_t[::1] sx = np.ascontiguousarray(xs, dtype=np.uint64)
    cdef const uint64_t[::1] sz = np.ascontiguousarray(zs, dtype=np.uint64)
    cdef Py_ssize_t n = sx.shape[0]

    assign_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] assign = assign_arr

    # Group storage: labels plus per-(qubit, letter) bitmaps over group ids.
    cdef uint64_t cap_g = 4096
    cdef uint64_t W = cap_g >> 6
    cdef uint64_t *lx = <uint64_t *>malloc(cap_g * sizeof(uint64_t))
    cdef uint64_t *lz = <uint64_t *>malloc(cap_g * sizeof(uint64_t))
    cdef uint64_t *bm = <uint64_t *>calloc(q * 4 * W, sizeof(uint64_t))
    cdef uint64_t *nbm
    cdef uint64_t *nlx
    cdef uint64_t *nlz
    cdef uint64_t G = 0
    cdef uint64_t W2

    cdef Py_ssize_t i
    cdef uint64_t x, z, sup, srem, acc, ext, word, bit
    cdef int64_t g
    cdef uint64_t wg_words, w
    cdef int m, c, t, nsup
    cdef int ms[64]
    cdef int cs[64]
    cdef int failed = 0

    if lx == NULL or lz == NULL or bm == NULL:
        free(lx); free(lz); free(bm)
        raise MemoryError("group table allocation failed")

    with nogil:
        for i in range(n):
            x = sx[i]
            z = sz[i]
            sup = x | z

            nsup = 0
            srem = sup
            while srem:
                m = QCM_CTZ(srem)
                srem &= srem - 1
                ms[nsup] = m
                cs[nsup] = ((x >> m) & 1) | (((z >> m) & 1) << 1)
                nsup += 1

            g = -1
            if nsup == 0:
                if G > 0:
                    g = 0
            else:
                wg_words = (G + 63) >> 6
                for w in range(wg_words):
                    acc = (bm[(ms[0] * 4) * W + w]
                           | bm[(ms[0] * 4 + cs[0]) * W + w])
                    t = 1
                    while acc != 0 and t < nsup:
                        acc &= (bm[(ms[t] * 4) * W + w]
                                | bm[(ms[t] * 4 + cs[t]) * W + w])
                        t += 1
                    if acc != 0:
                        g = <int64_t>(w << 6) + QCM_CTZ(acc)
                        break

            if g >= 0:
                assign[i] = g
                ext = sup & ~(lx[g] | lz[g])
                if ext:
                    lx[g] |= x & ext
                    lz[g] |= z & ext
                    word = (<uint64_t>g) >> 6
                    bit = (<uint64_t>1) << ((<uint64_t>g) & 63)
                    srem = ext
                    while srem:
                        m = QCM_CTZ(srem)
                        srem &= srem - 1
                        c = ((x >> m) & 1) | (((z >> m) & 1) << 1)
                        bm[(m * 4) * W + word] &= ~bit
                        bm[(m * 4 + c) * W + word] |= bit
            else:
                if G == cap_g:
                    # Double group capacity; bitmaps need re-laying out.
                    W2 = W * 2
                    nbm = <uint64_t *>calloc(q * 4 * W2, sizeof(uint64_t))
                    nlx = <uint64_t *>realloc(lx, cap_g * 2 * sizeof(uint64_t))
                    nlz = <uint64_t *>realloc(lz, cap_g * 2 * sizeof(uint64_t))
                    if nbm == NULL or nlx == NULL or nlz == NULL:
                        free(nbm)
                        if nlx != NULL:
                            lx = nlx
                        if nlz != NULL:
                            lz = nlz
                        failed = 1
                        break
                    for m in range(q * 4):
                        memcpy(&nbm[m * W2], &bm[m * W], W * sizeof(uint64_t))
                    free(bm)
                    bm = nbm
                    lx = nlx
                    lz = nlz
                    W = W2
                    cap_g *= 2
                word = G >> 6
                bit = (<uint64_t>1) << (G & 63)
                for m in range(q):
                    c = ((x >> m) & 1) | (((z >> m) & 1) << 1)
                    bm[(m * 4 + c) * W + word] |= bit
                lx[G] = x
                lz[G] = z
                assign[i] = <int64_t>G
                G += 1

    if failed:
        free(lx); free(lz); free(bm)
        raise MemoryError("group table allocation failed")

    label_x = np.empty(G, dtype=np.uint64)
    label_z = np.empty(G, dtype=np.uint64)
    cdef uint64_t[::1] lxv = label_x
    cdef uint64_t[::1] lzv = label_z
    cdef uint64_t gi
    for gi in range(G):
        lxv[gi] = lx[gi]
        lzv[gi] = lz[gi]
    free(lx); free(lz); free(bm)
    return assign_arr, label_x, label_z
