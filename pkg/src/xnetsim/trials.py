"""Batched Monte-Carlo trial blocks, one function per scheme.

Each block draws, in a fixed order, channels, message symbols and noise
from its own generator, runs the full transmit/receive chain and returns
the number of bit errors of every trial in the block.
"""

import numpy as np

from . import _fused, _sphere, schemes, stbc
from .channel import crandn, sample_channels
from .decoders import SPLIT_ORDER, SPLIT_POS, split_lift

SYMBOLS_PER_MESSAGE = {"ljj3": 6, "ar": 6, "ljj2": 2, "js3": 3}


def bits_per_trial(scheme, const):
    return 4 * SYMBOLS_PER_MESSAGE[scheme] * const.bits_per_symbol


def _bit_errors(const, idx_hat, idx_true):
    """Per-row Hamming distance between label sequences."""
    n = idx_hat.shape[0]
    x = const.labels[idx_hat].reshape(n, -1) ^ const.labels[idx_true].reshape(n, -1)
    out = np.zeros(x.shape[0], dtype=np.int64)
    while np.any(x):
        out += np.sum(x & 1, axis=1)
        x = x >> 1
    return out


def _slot_table(const, n_slots):
    pts = np.zeros((n_slots, len(const), 2))
    pts[:, :, 0] = const.points.real
    pts[:, :, 1] = const.points.imag
    return pts, np.full(n_slots, len(const), dtype=np.int64)


def _sphere_batch(g, y, table):
    idx, _ = _sphere.decode_batch(np.ascontiguousarray(g), np.ascontiguousarray(y), *table)
    return idx


def _draw(rng, n, m, const, n_sym, t_slots):
    h = sample_channels(rng, m, n)
    idx = rng.integers(0, len(const), (n, 2, 2, n_sym))
    noise = crandn(rng, (n, 2, m, t_slots))
    return h, idx, noise


def ljj3_block(rng, n, p, const, theta):
    """Compiled chain; same draws and decisions as :func:`ljj3_block_reference`."""
    h, idx, noise = _draw(rng, n, 3, const, 6, 6)
    code = stbc.proposed_3tx_code(theta)
    spec = code.cancel_spec
    w = np.empty((2, 2, 6))
    for dest in (0, 1):
        w[dest] = 1 / np.sqrt(np.stack(schemes.rs_noise_var(theta, dest)))
    c = schemes.C_LJJ3
    idx_hat = _fused.ljj3_chain(
        h, const.points[idx], noise, code.a_re, code.a_im,
        np.array([st.col for st in spec], dtype=np.int64),
        np.array([st.perm for st in spec], dtype=np.int64),
        np.array([st.alpha for st in spec], dtype=np.complex128),
        complex(np.exp(1j * theta)), np.sqrt(c), np.sqrt(p), np.sqrt(c * p), w,
        np.stack(SPLIT_POS), np.stack(SPLIT_ORDER), *_slot_table(const, 12))
    errors = np.zeros(n, dtype=np.int64)
    for dest in (0, 1):
        errors += _bit_errors(const, idx_hat[:, dest], idx[:, :, dest, :])
    return errors


def ljj3_block_reference(rng, n, p, const, theta):
    """The numpy pipeline of :mod:`schemes`, kept as the oracle for the kernel."""
    h, idx, noise = _draw(rng, n, 3, const, 6, 6)
    s = const.points[idx]
    v = schemes.ljj_precoders(h)
    y = schemes.propagate(h, schemes.ljj3_transmit(h, s, theta, v=v), p, noise)
    gain = np.sqrt(schemes.C_LJJ3 * p)
    table = _slot_table(const, 12)
    errors = np.zeros(n, dtype=np.int64)
    for dest in (0, 1):
        if dest == 0:
            yp = schemes.ljj3_receive_cancel(y[:, 0], theta)
        else:
            yp = schemes.ljj3_receive_cancel_rx2(y[:, 1], theta)
        v_r, v_s = schemes.rs_observations(yp, theta)
        n_r, n_s = schemes.rs_noise_var(theta, dest)
        hm, gm = schemes.desired_effective(h, dest, v)
        r, s_mat = schemes.rs_from_hg(hm, gm, theta)
        # whiten: cleaned entries carry noise of variance 1 + |alpha|^2
        w_r, w_s = gain / np.sqrt(n_r), gain / np.sqrt(n_s)
        ga, gb = split_lift(r * w_r[:, None], s_mat * w_s[:, None])
        v_r, v_s = v_r * (w_r / gain), v_s * (w_s / gain)
        idx_hat, _ = _sphere.decode_split_batch(
            ga, np.concatenate([v_r.real, v_r.imag], axis=-1), SPLIT_POS[0],
            gb, np.concatenate([v_s.real, v_s.imag], axis=-1), SPLIT_POS[1], *table)
        errors += _bit_errors(const, idx_hat, idx[:, :, dest, :])
    return errors


def ljj2_block(rng, n, p, const, theta=0.0):
    h, idx, noise = _draw(rng, n, 2, const, 2, 3)
    s = const.points[idx]
    y = schemes.propagate(h, schemes.ljj2_transmit(h, s), p, noise)
    gain = np.sqrt(schemes.C_LJJ2 * p)
    table = _slot_table(const, 4)
    code = stbc.alamouti_code()
    errors = np.zeros(n, dtype=np.int64)

    # Rx-1 through the zero-forcing matrix F
    obs = schemes.ljj2_y2(y[:, 0]) @ schemes.ZF_F.T
    hm, gm = schemes.desired_effective(h, 0)
    r = schemes.ljj2_effective(hm, gm)
    w = 1 / np.sqrt(np.array([1.0, 2.0, 2.0, 1.0]))
    r = gain * r * w[:, None]
    obs = obs * w
    g = np.empty((n, 8, 8))
    g[:, :4, 0::2], g[:, 4:, 0::2] = r.real, r.imag
    g[:, :4, 1::2], g[:, 4:, 1::2] = -r.imag, r.real
    idx_hat = _sphere_batch(g, np.concatenate([obs.real, obs.imag], axis=-1), table)
    errors += _bit_errors(const, idx_hat, idx[:, :, 0, :])

    # Rx-2 through the generic cancellation receiver
    yp = stbc.cancel_interference(y[:, 1], code, "rx2")
    w2 = 1 / np.sqrt(stbc.processed_noise_var(code, "rx2")).ravel()
    hm, gm = schemes.desired_effective(h, 1)
    g = schemes.ljj_linear_generator(hm, gm, code, gain)
    g = g * np.concatenate([w2, w2])[:, None]
    flat = (yp.reshape(n, -1)) * w2
    idx_hat = _sphere_batch(g, np.concatenate([flat.real, flat.imag], axis=-1), table)
    errors += _bit_errors(const, idx_hat, idx[:, :, 1, :])
    return errors


def js3_block(rng, n, p, const, theta=0.0):
    h = sample_channels(rng, 3, n)
    idx = rng.integers(0, len(const), (n, 2, 2, 3))
    noise = crandn(rng, (n, 2, 9))
    s = const.points[idx]
    gain = np.sqrt(schemes.C_JS * p)
    pts = const.points
    errors = np.zeros(n, dtype=np.int64)
    base = np.zeros((9, len(pts) ** 2, 2))
    sizes = np.array([len(pts)] * 6 + [len(pts) ** 2] * 3, dtype=np.int64)
    base[:6, :len(pts), 0] = pts.real
    base[:6, :len(pts), 1] = pts.imag
    for t in range(n):
        v = schemes.js3_precoders(h[t])
        y = schemes.js3_receive(h[t], schemes.js3_transmit(h[t], s[t], v), p, noise[t])
        for dest in (0, 1):
            a1, a2, b, beta = schemes.js3_rx_terms(h[t], v, dest)
            mix = (pts[:, None] + beta * pts[None, :]).ravel()
            table = base.copy()
            table[6:, :, 0] = mix.real
            table[6:, :, 1] = mix.imag
            cmat = gain * np.concatenate([a1, a2, b], axis=1)  # 9 x 9 complex
            g = np.empty((18, 18))
            g[:9, 0::2], g[9:, 0::2] = cmat.real, cmat.imag
            g[:9, 1::2], g[9:, 1::2] = -cmat.imag, cmat.real
            q, r = np.linalg.qr(g)
            yv = np.concatenate([y[dest].real, y[dest].imag])
            best = np.full(9, table.shape[1], dtype=np.int64)
            _sphere.sphere_search(np.ascontiguousarray(r), q.T @ yv, table, sizes, best)
            want = np.concatenate([idx[t, 0, dest], idx[t, 1, dest]])
            errors[t] += _bit_errors(const, best[None, :6], want[None, :])[0]
    return errors


BLOCKS = {"ljj3": ljj3_block, "ar": ljj3_block, "ljj2": ljj2_block, "js3": js3_block}
