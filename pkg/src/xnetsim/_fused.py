"""Fused per-trial chain for the 3-antenna LJJ scheme.

One compiled loop runs precoding, encoding, propagation, cancellation,
the R/S model, whitening and the split sphere search for every trial.
It mirrors the numpy pipeline in :mod:`xnetsim.schemes` operation by
operation; the tests hold the two to identical decisions.
"""

import numpy as np
from numba import njit

from ._sphere import qr_reduce, sphere_search


@njit(cache=True)
def _inv3_normalized(a, out):
    """``inv(a) / ||inv(a)||_F`` for a 3 x 3 complex matrix, by cofactors."""
    c00 = a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    c01 = a[1, 2] * a[2, 0] - a[1, 0] * a[2, 2]
    c02 = a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]
    det = a[0, 0] * c00 + a[0, 1] * c01 + a[0, 2] * c02
    out[0, 0] = c00
    out[1, 0] = c01
    out[2, 0] = c02
    out[0, 1] = a[0, 2] * a[2, 1] - a[0, 1] * a[2, 2]
    out[1, 1] = a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
    out[2, 1] = a[0, 1] * a[2, 0] - a[0, 0] * a[2, 1]
    out[0, 2] = a[0, 1] * a[1, 2] - a[0, 2] * a[1, 1]
    out[1, 2] = a[0, 2] * a[1, 0] - a[0, 0] * a[1, 2]
    out[2, 2] = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    fro = 0.0
    for i in range(3):
        for j in range(3):
            out[i, j] /= det
            fro += out[i, j].real ** 2 + out[i, j].imag ** 2
    fro = np.sqrt(fro)
    for i in range(3):
        for j in range(3):
            out[i, j] /= fro


@njit(cache=True)
def _lift_block(mat, w, gain, order, g):
    """Whitened real lift ``[[Re, -Im], [Im, Re]]`` with reordered columns."""
    for c in range(12):
        src = order[c]
        k = src % 6
        for i in range(6):
            v = mat[i, k] * (gain * w[i])
            if src < 6:
                g[i, c] = v.real
                g[i + 6, c] = v.imag
            else:
                g[i, c] = -v.imag
                g[i + 6, c] = v.real


@njit(cache=True)
def ljj3_chain(h, s, noise, a_re, a_im, cols, perms, alphas, e, amp, sqrt_p,
               gain, w, pos, order, pts, sizes):
    """Decide both messages at both receivers for a batch of trials.

    Parameters
    ----------
    h : (n, 2, 2, 3, 3) complex
        Channel blocks indexed (Tx, Rx).
    s : (n, 2, 2, 6) complex
        Transmitted symbols indexed (Tx, Rx, symbol).
    noise : (n, 2, 3, 6) complex
        Receiver noise.
    a_re, a_im : (6, 3, 4) complex
        Dispersion matrices of the code.
    cols, perms, alphas : cancellation spec as arrays.
    e : complex
        ``exp(j theta)``.
    amp, sqrt_p, gain : float
        ``sqrt(c)``, ``sqrt(P)`` and the receive gain ``sqrt(c P)``.
    w : (2, 2, 6) float
        Whitening weights (receiver, R/S, entry).
    pos, order : (2, 12) int
        Split coordinate positions and lift column orders.

    Returns
    -------
    (n, 2, 12) int
        Decided symbol indices (receiver, Tx-1 then Tx-2 symbols).
    """
    n = h.shape[0]
    out = np.empty((n, 2, 12), dtype=np.int64)
    v = np.empty((2, 2, 3, 3), dtype=np.complex128)
    cw = np.empty((3, 4), dtype=np.complex128)
    x = np.empty((2, 3, 6), dtype=np.complex128)
    y = np.empty((3, 6), dtype=np.complex128)
    yp = np.empty((3, 4), dtype=np.complex128)
    eff = np.empty((2, 3, 3), dtype=np.complex128)
    rm = np.empty((6, 6), dtype=np.complex128)
    sm = np.empty((6, 6), dtype=np.complex128)
    obs = np.empty((2, 6), dtype=np.complex128)
    ga = np.empty((12, 12))
    gb = np.empty((12, 12))
    ya = np.empty(12)
    yb = np.empty(12)
    ra = np.empty((12, 12))
    rb = np.empty((12, 12))
    za = np.empty(12)
    zb = np.empty(12)
    r = np.zeros((24, 24))
    z = np.empty(24)
    ec = np.conj(e)
    best = np.empty(12, dtype=np.int64)
    for t in range(n):
        for i in range(2):
            for j in range(2):
                _inv3_normalized(h[t, i, 1 - j], v[i, j])
        # transmit
        x[:] = 0.0
        for i in range(2):
            for j in range(2):
                cw[:] = 0.0
                for k in range(6):
                    sr = s[t, i, j, k].real
                    si = s[t, i, j, k].imag
                    for a in range(3):
                        for b in range(4):
                            cw[a, b] += sr * a_re[k, a, b] + si * a_im[k, a, b]
                off = j
                for kk in range(2):
                    for c in range(2):
                        slot = 3 * kk + off + c
                        for a in range(3):
                            acc = 0j
                            for b in range(3):
                                acc += v[i, j, a, b] * cw[b, 2 * kk + c]
                            x[i, a, slot] += amp * acc
        for dest in range(2):
            # receive
            for a in range(3):
                for c in range(6):
                    acc = 0j
                    for i in range(2):
                        for b in range(3):
                            acc += h[t, i, dest, a, b] * x[i, b, c]
                    y[a, c] = sqrt_p * acc + noise[t, dest, a, c]
            # cancel
            for k in range(2):
                p = cols[k]
                for a in range(3):
                    if dest == 0:
                        yp[a, p] = y[a, 3 * k]
                        yp[a, p + 1] = y[a, 3 * k + 1] + alphas[k, a] * np.conj(y[perms[k, a], 3 * k + 2])
                    else:
                        yp[a, p] = y[a, 3 * k + 1]
                        yp[a, p + 1] = y[a, 3 * k + 2]
                if dest == 1:
                    for a in range(3):
                        yp[perms[k, a], p] += np.conj(y[a, 3 * k] / alphas[k, a])
            # observations
            for a in range(3):
                obs[0, 2 * a] = yp[a, 0]
                obs[0, 2 * a + 1] = np.conj(yp[a, 1])
                obs[1, 2 * a] = ec * yp[a, 2]
                obs[1, 2 * a + 1] = np.conj(ec * yp[a, 3])
            # effective channels and R/S
            for i in range(2):
                for a in range(3):
                    for b in range(3):
                        acc = 0j
                        for c in range(3):
                            acc += h[t, i, dest, a, c] * v[i, dest, c, b]
                        eff[i, a, b] = acc
            for blk in range(2):
                c0 = 3 * blk
                for a in range(3):
                    m1 = eff[blk, a, 0]
                    m2 = eff[blk, a, 1]
                    m3 = eff[blk, a, 2]
                    rm[2 * a, c0] = m1
                    rm[2 * a, c0 + 1] = m2
                    rm[2 * a, c0 + 2] = e * m3
                    rm[2 * a + 1, c0] = np.conj(m2)
                    rm[2 * a + 1, c0 + 1] = -np.conj(m1)
                    rm[2 * a + 1, c0 + 2] = -ec * np.conj(m3)
                    sm[2 * a, c0] = m1
                    sm[2 * a, c0 + 1] = ec * m3
                    sm[2 * a, c0 + 2] = m2
                    sm[2 * a + 1, c0] = np.conj(m2)
                    sm[2 * a + 1, c0 + 1] = -np.conj(m1)
                    sm[2 * a + 1, c0 + 2] = -e * np.conj(m3)
            _lift_block(rm, w[dest, 0], gain, order[0], ga)
            _lift_block(sm, w[dest, 1], gain, order[1], gb)
            for a in range(6):
                ya[a] = obs[0, a].real * w[dest, 0, a]
                ya[a + 6] = obs[0, a].imag * w[dest, 0, a]
                yb[a] = obs[1, a].real * w[dest, 1, a]
                yb[a + 6] = obs[1, a].imag * w[dest, 1, a]
            qr_reduce(ga, ya, ra, za)
            qr_reduce(gb, yb, rb, zb)
            for a in range(12):
                z[pos[0, a]] = za[a]
                z[pos[1, a]] = zb[a]
                for b in range(12):
                    r[pos[0, a], pos[0, b]] = ra[a, b]
                    r[pos[1, a], pos[1, b]] = rb[a, b]
            for a in range(12):
                best[a] = pts.shape[1]
            sphere_search(r, z, pts, sizes, best)
            for a in range(12):
                out[t, dest, a] = best[a]
    return out
