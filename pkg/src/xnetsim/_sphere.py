"""Compiled kernels for exact ML search over per-symbol alphabets.

The real model is ``z = R u + noise`` with ``R`` upper triangular and
symbol ``s`` occupying coordinates ``(2s, 2s+1)``. The search visits
symbols from last to first in Schnorr-Euchner order, so the first leaf is
the Babai point and the radius only shrinks afterwards.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _lex_less(a, b):
    for i in range(a.shape[0]):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


@njit(cache=True)
def _expand(level, r, z, u, pts, sizes, incs, order):
    n = r.shape[0]
    i0 = 2 * level
    i1 = i0 + 1
    b0 = z[i0]
    b1 = z[i1]
    for j in range(i1 + 1, n):
        b0 -= r[i0, j] * u[j]
        b1 -= r[i1, j] * u[j]
    m = sizes[level]
    for k in range(m):
        xr = pts[level, k, 0]
        xi = pts[level, k, 1]
        e1 = b1 - r[i1, i1] * xi
        e0 = b0 - r[i0, i1] * xi - r[i0, i0] * xr
        incs[level, k] = e0 * e0 + e1 * e1
    # insertion sort, alphabets are tiny
    for k in range(m):
        order[level, k] = k
    for k in range(1, m):
        key = order[level, k]
        v = incs[level, key]
        j = k - 1
        while j >= 0 and (incs[level, order[level, j]] > v or
                          (incs[level, order[level, j]] == v and order[level, j] > key)):
            order[level, j + 1] = order[level, j]
            j -= 1
        order[level, j + 1] = key


@njit(cache=True)
def sphere_search(r, z, pts, sizes, best_idx):
    """Exact ML search for one problem; writes the argmin into ``best_idx``.

    Returns the triangular-domain metric ``||z - R u||^2`` of the decision.
    Ties are broken toward the lexicographically smallest index tuple.
    """
    n = r.shape[0]
    ns = n // 2
    kmax = pts.shape[1]
    u = np.zeros(n)
    incs = np.empty((ns, kmax))
    order = np.empty((ns, kmax), dtype=np.int64)
    pos = np.zeros(ns, dtype=np.int64)
    partial = np.zeros(ns + 1)
    cur = np.zeros(ns, dtype=np.int64)
    best = np.inf
    level = ns - 1
    _expand(level, r, z, u, pts, sizes, incs, order)
    while True:
        if pos[level] >= sizes[level]:
            level += 1
            if level == ns:
                break
            pos[level] += 1
            continue
        k = order[level, pos[level]]
        d = partial[level + 1] + incs[level, k]
        if d > best:
            # remaining candidates at this level are no better
            level += 1
            if level == ns:
                break
            pos[level] += 1
            continue
        cur[level] = k
        u[2 * level] = pts[level, k, 0]
        u[2 * level + 1] = pts[level, k, 1]
        partial[level] = d
        if level == 0:
            if d < best or _lex_less(cur, best_idx):
                best = d
                for i in range(ns):
                    best_idx[i] = cur[i]
            pos[0] += 1
            continue
        level -= 1
        pos[level] = 0
        _expand(level, r, z, u, pts, sizes, incs, order)
    return best


@njit(cache=True)
def sphere_search_batch(r, z, pts, sizes):
    """Run :func:`sphere_search` over stacks ``r (B, n, n)`` and ``z (B, n)``."""
    nb = r.shape[0]
    ns = r.shape[1] // 2
    out = np.zeros((nb, ns), dtype=np.int64)
    metric = np.empty(nb)
    for b in range(nb):
        for i in range(ns):
            out[b, i] = pts.shape[1]  # sentinel: larger than any index
        metric[b] = sphere_search(r[b], z[b], pts, sizes, out[b])
    return out, metric


@njit(cache=True, fastmath=True)
def qr_reduce(g, y, r, z):
    """Householder triangularisation of ``[g | y]`` into ``r`` and ``z = Q^T y``.

    ``g`` is ``(m, n)`` with ``m >= n``; only the leading ``n`` rows of the
    reduced system are written. Inputs are left untouched.
    """
    m, n = g.shape
    # column-major working copy so the reflector loops run over contiguous memory
    a = np.empty((n + 1, m))
    for i in range(m):
        for j in range(n):
            a[j, i] = g[i, j]
        a[n, i] = y[i]
    v = np.empty(m)
    for k in range(n):
        norm = 0.0
        for i in range(k, m):
            norm += a[k, i] * a[k, i]
        norm = np.sqrt(norm)
        if norm == 0.0:
            continue
        alpha = -norm if a[k, k] >= 0 else norm
        for i in range(k, m):
            v[i] = a[k, i]
        v[k] -= alpha
        vnorm = 0.0
        for i in range(k, m):
            vnorm += v[i] * v[i]
        if vnorm == 0.0:
            continue
        scale = 2.0 / vnorm
        for j in range(k, n + 1):
            s = 0.0
            for i in range(k, m):
                s += v[i] * a[j, i]
            s *= scale
            for i in range(k, m):
                a[j, i] -= s * v[i]
    for i in range(n):
        for j in range(n):
            r[i, j] = a[j, i] if j >= i else 0.0
        z[i] = a[n, i]


@njit(cache=True)
def decode_batch(g, y, pts, sizes):
    """QR-reduce and sphere-decode each system of the stacks ``g``, ``y``."""
    nb, _, n = g.shape
    ns = n // 2
    out = np.zeros((nb, ns), dtype=np.int64)
    metric = np.empty(nb)
    r = np.empty((n, n))
    z = np.empty(n)
    for b in range(nb):
        qr_reduce(g[b], y[b], r, z)
        for i in range(ns):
            out[b, i] = pts.shape[1]
        metric[b] = sphere_search(r, z, pts, sizes, out[b])
    return out, metric


@njit(cache=True)
def decode_split_batch(ga, ya, pos_a, gb, yb, pos_b, pts, sizes):
    """Sphere-decode systems made of two row blocks with disjoint unknowns.

    Block ``a`` drives the coordinates ``pos_a`` (ascending) and block ``b``
    the coordinates ``pos_b``. When every symbol owns one coordinate in each
    block, the two small triangular factors interleave into an upper
    triangular factor of the joint system, so the joint search stays exact.
    """
    nb = ga.shape[0]
    na, nbk = pos_a.shape[0], pos_b.shape[0]
    n = na + nbk
    ns = n // 2
    out = np.zeros((nb, ns), dtype=np.int64)
    metric = np.empty(nb)
    r = np.zeros((n, n))
    z = np.empty(n)
    ra = np.empty((na, na))
    za = np.empty(na)
    rb = np.empty((nbk, nbk))
    zb = np.empty(nbk)
    for b in range(nb):
        qr_reduce(ga[b], ya[b], ra, za)
        qr_reduce(gb[b], yb[b], rb, zb)
        for i in range(na):
            z[pos_a[i]] = za[i]
            for j in range(na):
                r[pos_a[i], pos_a[j]] = ra[i, j]
        for i in range(nbk):
            z[pos_b[i]] = zb[i]
            for j in range(nbk):
                r[pos_b[i], pos_b[j]] = rb[i, j]
        for i in range(ns):
            out[b, i] = pts.shape[1]
        metric[b] = sphere_search(r, z, pts, sizes, out[b])
    return out, metric
