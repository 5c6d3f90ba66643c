"""Transmit/receive pipelines for the (2, 2, M) X-network.

Array conventions: channels are ``(..., 2, 2, M, M)`` with ``h[..., i, j]``
the gain from Tx-(i+1) to Rx-(j+1); precoders use the same indexing with
``j`` the destination. Symbols are ``(..., 2, 2, L)`` indexed (Tx, Rx,
symbol). Leading axes are trial batches.
"""

import numpy as np

from . import stbc
from .channel import ChannelRealization
from .exceptions import ChannelDegenerate, DefectiveMatrix
from .numerics import batch_inverse, eig_general, kron

C_LJJ3 = 0.75
C_LJJ2 = 0.75
C_JS = 1.5
SCHEMES = ("ljj3", "ar", "ljj2", "js3")


def _h(ch):
    return np.asarray(getattr(ch, "h", ch), dtype=np.complex128)


def _inv(a):
    inv, bad = batch_inverse(a)
    if np.any(bad):
        raise ChannelDegenerate("singular channel block")
    return inv


def _trace_normalize(a):
    fro = np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1), keepdims=True))
    return a / fro


# ---------------------------------------------------------------- LJJ family

def ljj_precoders(ch):
    """Trace-normalized channel inverses: V_ij inverts the channel to the other receiver."""
    h = _h(ch)
    inv = _inv(h)
    v = np.empty_like(h)
    for i in range(2):
        for j in range(2):
            v[..., i, j, :, :] = _trace_normalize(inv[..., i, 1 - j, :, :])
    return v


ljj3_precoders = ljj_precoders


def interference_gains(ch):
    """Scalars with ``H_ij V_i(other)`` = gain * I at each receiver.

    Returns ``(..., 2, 2)`` indexed (Tx, receiving Rx).
    """
    h = _h(ch)
    inv = _inv(h)
    return 1.0 / np.sqrt(np.sum(np.abs(inv) ** 2, axis=(-2, -1)))


def ljj_transmit(ch, symbols, code, c=C_LJJ3, v=None):
    """Tx matrices ``X_i = sqrt(c) (V_i1 X_i1 + V_i2 X_i2)``, shape ``(..., 2, M, 3T'/2)``.

    ``sqrt(P)`` and the channel are applied by :func:`propagate`; ``v``
    reuses precoders already computed by :func:`ljj_precoders`.
    """
    if v is None:
        v = ljj_precoders(ch)
    s = np.asarray(symbols, dtype=np.complex128)
    x = code.encode(s)  # (..., 2, 2, M, T')
    out = 0
    for j, dest in ((0, "rx1"), (1, "rx2")):
        xj = stbc.interleave_zero_columns(x[..., :, j, :, :], dest)
        out = out + v[..., :, j, :, :] @ xj
    return np.sqrt(c) * out


def ljj3_transmit(ch, symbols, theta, c=C_LJJ3, v=None):
    return ljj_transmit(ch, symbols, stbc.proposed_3tx_code(theta), c, v)


def propagate(ch, x, p, noise=None):
    """``Y_j = sqrt(P) sum_i H_ij X_i + N_j`` for both receivers, ``(..., 2, M, T)``."""
    h = _h(ch)
    y = np.sqrt(p) * np.einsum("...ijab,...ibt->...jat", h, x)
    if noise is not None:
        y = y + noise
    return y


def ljj3_receive_cancel(y1, theta):
    """Rx-1 interference cancellation for the 3-antenna code, entry by entry."""
    y = np.asarray(y1, dtype=np.complex128)
    e = np.exp(1j * theta)
    e2 = e * e
    cj = np.conj
    out = np.empty(y.shape[:-1] + (4,), dtype=np.complex128)
    out[..., :, 0] = y[..., :, 0]
    out[..., :, 2] = y[..., :, 3]
    out[..., 0, 1] = y[..., 0, 1] - cj(y[..., 1, 2])
    out[..., 1, 1] = y[..., 1, 1] + cj(y[..., 0, 2])
    out[..., 2, 1] = y[..., 2, 1] + e2 * cj(y[..., 2, 2])
    out[..., 0, 3] = y[..., 0, 4] - e2 * cj(y[..., 1, 5])
    out[..., 1, 3] = y[..., 1, 4] + e * cj(y[..., 2, 5])
    out[..., 2, 3] = y[..., 2, 4] + e * cj(y[..., 0, 5])
    return out


def ljj3_receive_cancel_rx2(y2, theta):
    """Rx-2 counterpart: slot-1/4 pure interference cleans slots 2/5."""
    return stbc.cancel_interference(y2, stbc.proposed_3tx_code(theta), "rx2")


def desired_effective(ch, dest, v=None):
    """``(H, G) = (H_1j V_1j, H_2j V_2j)`` for receiver ``dest`` (0 or 1)."""
    h = _h(ch)
    if v is None:
        v = ljj_precoders(h)
    return h[..., 0, dest, :, :] @ v[..., 0, dest, :, :], h[..., 1, dest, :, :] @ v[..., 1, dest, :, :]


def rs_from_hg(hm, gm, theta):
    """Effective matrices R (columns 1-2 of Y') and S (columns 3-4).

    Unknowns are ``(p1, p2, p3)`` of Tx-1 then Tx-2 for R and
    ``(p4, p5, p6)`` for S. The processed observation vectors are built by
    :func:`rs_observations`.
    """
    hm = np.asarray(hm, dtype=np.complex128)
    gm = np.asarray(gm, dtype=np.complex128)
    e = np.exp(1j * theta)
    ec = np.conj(e)
    shape = np.broadcast_shapes(hm.shape, gm.shape)[:-2] + (6, 6)
    r = np.zeros(shape, dtype=np.complex128)
    s = np.zeros(shape, dtype=np.complex128)
    cj = np.conj
    for blk, m in ((0, hm), (1, gm)):
        c0 = 3 * blk
        for i in range(3):
            m1, m2, m3 = m[..., i, 0], m[..., i, 1], m[..., i, 2]
            r[..., 2 * i, c0:c0 + 3] = np.stack([m1, m2, e * m3], axis=-1)
            r[..., 2 * i + 1, c0:c0 + 3] = np.stack([cj(m2), -cj(m1), -ec * cj(m3)], axis=-1)
            s[..., 2 * i, c0:c0 + 3] = np.stack([m1, ec * m3, m2], axis=-1)
            s[..., 2 * i + 1, c0:c0 + 3] = np.stack([cj(m2), -cj(m1), -e * cj(m3)], axis=-1)
    return r, s


def ljj3_effective_matrices(ch, theta, dest=0):
    hm, gm = desired_effective(ch, dest)
    return rs_from_hg(hm, gm, theta)


def rs_observations(yp, theta):
    """Vectorize a processed ``(..., 3, 4)`` output into the R and S observations."""
    yp = np.asarray(yp, dtype=np.complex128)
    ec = np.exp(-1j * theta)
    v_r = np.empty(yp.shape[:-2] + (6,), dtype=np.complex128)
    v_s = np.empty_like(v_r)
    v_r[..., 0::2] = yp[..., :, 0]
    v_r[..., 1::2] = np.conj(yp[..., :, 1])
    v_s[..., 0::2] = ec * yp[..., :, 2]
    v_s[..., 1::2] = np.conj(ec * yp[..., :, 3])
    return v_r, v_s


def rs_noise_var(theta, dest):
    """Noise variance of each entry of the R and S observation vectors."""
    var = stbc.processed_noise_var(stbc.proposed_3tx_code(theta), "rx1" if dest == 0 else "rx2")
    vr = np.empty(6)
    vs = np.empty(6)
    vr[0::2], vr[1::2] = var[:, 0], var[:, 1]
    vs[0::2], vs[1::2] = var[:, 2], var[:, 3]
    return vr, vs


def ljj_linear_generator(hm, gm, code, gain=1.0):
    """Real generator of ``vec(Y') = gain (H X'(s1) + G X'(s2))`` by linearity.

    Rows are ``[Re vec(Y'); Im vec(Y')]`` in row-major order; unknowns are
    Tx-1's symbols then Tx-2's as (real, imag) pairs. Used for codes other
    than the 3-antenna one and as a cross-check of :func:`rs_from_hg`.
    """
    disp = code.dispersion()  # (2L, M, T')
    cols = []
    for m in (hm, gm):
        img = np.einsum("...ab,dbt->...dat", np.asarray(m, dtype=np.complex128), disp)
        flat = img.reshape(img.shape[:-2] + (-1,))
        cols.append(np.concatenate([flat.real, flat.imag], axis=-1))
    g = np.concatenate(cols, axis=-2)  # (..., 4L, rows)
    return gain * np.swapaxes(g, -1, -2)


# ---------------------------------------------------------------- LJJ (2,2,2)

ZF_F = np.array([
    [1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, -1],
    [0, 0, 1, 0, 1, 0],
    [0, 0, 0, 1, 0, 0],
], dtype=np.complex128)


def ljj2_transmit(ch, symbols, c=C_LJJ2):
    return ljj_transmit(ch, symbols, stbc.alamouti_code(), c)


def ljj2_y2(y1):
    """``Y''`` of the 2-antenna scheme: rows of ``[Y(:,1), conj Y(:,2), Y(:,3)]`` stacked."""
    y = np.asarray(y1, dtype=np.complex128)
    yp = y.copy()
    yp[..., :, 1] = np.conj(y[..., :, 1])
    return yp.reshape(yp.shape[:-2] + (6,))


def ljj2_effective(hm, gm):
    """4 x 4 matrix mapping (x1_11, x2_11, x1_21, x2_21) to ``F Y''``.

    Rows follow the output order of ``F``.
    """
    cj = np.conj

    def row_a(i):
        return [hm[..., i, 0], hm[..., i, 1], gm[..., i, 0], gm[..., i, 1]]

    def row_b(i):
        return [cj(hm[..., i, 1]), -cj(hm[..., i, 0]), cj(gm[..., i, 1]), -cj(gm[..., i, 0])]

    rows = [row_a(0), row_b(0), row_b(1), row_a(1)]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def ljj2_pipeline(ch, symbols, p, noise=None):
    """Rx-1 of the 2-antenna LJJ scheme.

    Returns ``(F Y'', R, Y)`` where ``F Y'' = sqrt(3P/4) R x + F N''`` with
    ``x = (x1_11, x2_11, x1_21, x2_21)``.
    """
    h = _h(ch)
    x = ljj2_transmit(h, symbols)
    y = propagate(h, x, p, noise)
    obs = ljj2_y2(y[..., 0, :, :]) @ ZF_F.T
    hm, gm = desired_effective(h, 0)
    return obs, ljj2_effective(hm, gm), y


# ---------------------------------------------------------------- JS (2,2,3)

V1_SEL = np.kron(np.eye(3), np.array([[1], [1], [0]])).astype(np.complex128)
V2_SEL = np.kron(np.eye(3), np.array([[1], [0], [1]])).astype(np.complex128)


def extend(h, reps=3):
    """Block-diagonal ``I_reps (x) H`` for a stack of matrices."""
    h = np.asarray(h, dtype=np.complex128)
    m = h.shape[-1]
    out = np.zeros(h.shape[:-2] + (reps * m, reps * m), dtype=np.complex128)
    for k in range(reps):
        out[..., k * m:(k + 1) * m, k * m:(k + 1) * m] = h
    return out


def js3_precoders(ch):
    """Alignment precoders over the 3-slot extension, shape ``(2, 2, 9, 3)``.

    ``F' = I_3 (x) f`` has every eigenvalue of ``f`` three times, so the
    eigenbasis is assembled as ``I_3 (x) E_f``; this places the three
    distinct eigenvalues in each consecutive column triple, which the
    selection matrices rely on for separability.
    """
    h = _h(ch)
    if h.ndim != 4:
        raise ValueError("js3_precoders works on a single realization")
    inv = _inv(h)
    f = inv[0, 0] @ h[1, 0] @ inv[1, 1] @ h[0, 1]
    fp = extend(f)
    wf, ef = eig_general(f)
    e = kron(np.eye(3), ef)
    w = np.tile(wf, 3)
    if np.linalg.norm(fp @ e - e * w[None, :]) > 1e-8 * max(np.linalg.norm(fp), 1.0):
        raise DefectiveMatrix("block eigenbasis does not diagonalize F'")
    hp = extend(h)
    invp = extend(inv)
    v = np.empty((2, 2, 9, 3), dtype=np.complex128)
    v[0, 0] = e @ V1_SEL
    v[0, 1] = e @ V2_SEL
    v[1, 0] = invp[1, 1] @ hp[0, 1] @ v[0, 0]
    v[1, 1] = invp[1, 0] @ hp[0, 0] @ v[0, 1]
    return v


def js3_normalized(v):
    """Unit-Frobenius-norm precoders (square-root trace normalization)."""
    return _trace_normalize(v)


def js3_transmit(ch, symbols, v=None):
    """Per-Tx 9-vectors ``sum_k V_ik / ||V_ik|| X_ik`` (without the power factor).

    ``symbols`` is ``(2, 2, 3)`` indexed (Tx, Rx, symbol).
    """
    if v is None:
        v = js3_precoders(ch)
    vn = js3_normalized(v)
    s = np.asarray(symbols, dtype=np.complex128)
    return np.einsum("ikab,...ikb->...ia", vn, s)


def js3_receive(ch, x, p, noise=None):
    """``Y'_j = sqrt(3P/2) sum_i H'_ij x_i + N'_j``; returns ``(2, 9)``."""
    hp = extend(_h(ch))
    y = np.sqrt(C_JS * p) * np.einsum("ijab,...ib->...ja", hp, x)
    if noise is not None:
        y = y + noise
    return y


def js3_rx_terms(ch, v, dest):
    """Columns multiplying (desired from Tx-1, desired from Tx-2, aligned sum).

    Returns ``(A1, A2, B, beta)`` with the noiseless observation at
    receiver ``dest`` equal to ``sqrt(3P/2) (A1 x_1d + A2 x_2d + B (x_1o + beta x_2o))``
    where ``o`` is the other receiver.
    """
    hp = extend(_h(ch))
    vn = js3_normalized(v)
    other = 1 - dest
    a1 = hp[0, dest] @ vn[0, dest]
    a2 = hp[1, dest] @ vn[1, dest]
    b = hp[0, dest] @ vn[0, other]
    beta = np.linalg.norm(v[0, other]) / np.linalg.norm(v[1, other])
    return a1, a2, b, beta


def as_realization(h):
    return ChannelRealization(np.asarray(h, dtype=np.complex128))
