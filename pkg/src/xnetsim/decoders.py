"""Symbol detectors for real-lifted linear models.

Three detectors share one model description (:class:`RealLinearModel`):

* :class:`ZeroForcingDecoder` - linear inversion, used for the DoF argument;
* :class:`MLEnumerator` - brute force over the product alphabet;
* :class:`SphereDecoder` - depth-first exact ML, the workhorse for BER runs.

The detectors follow the scikit-learn estimator protocol: ``fit`` takes the
generator (and symbol slots) and does the per-channel work once, ``predict``
decodes any number of observations against it.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np
from sklearn.base import BaseEstimator

from . import _sphere
from ._validation import check_is_fitted, check_observations, check_real_matrix
from .exceptions import (ChannelDegenerate, DimensionMismatch, RankDeficientGenerator,
                         SearchSpaceTooLarge)
from .numerics import RANK_RTOL

MAX_HYPOTHESES = 2**20


@dataclass(frozen=True, eq=False)
class SymbolSlot:
    """One complex unknown: its alphabet and the two real coordinates it drives."""

    points: np.ndarray  # complex alphabet
    dims: tuple  # (index of real part, index of imaginary part)

    @classmethod
    def of(cls, alphabet, dims):
        pts = np.asarray(getattr(alphabet, "points", alphabet), dtype=np.complex128).ravel()
        return cls(pts, (int(dims[0]), int(dims[1])))


@dataclass(frozen=True, eq=False)
class RealLinearModel:
    """``observation = generator @ u + noise`` with ``u`` built from the slots."""

    observation: np.ndarray
    generator: np.ndarray
    slots: tuple
    noise_variance: float = 1.0

    def __post_init__(self):
        g = check_real_matrix(self.generator, "generator")
        used = sorted(d for s in self.slots for d in s.dims)
        if used != list(range(g.shape[1])):
            raise DimensionMismatch("every generator column must belong to exactly one slot")
        obs = np.asarray(self.observation, dtype=np.float64)
        if obs.shape[-1] != g.shape[0]:
            raise DimensionMismatch("observation length does not match generator rows")

    def unknowns(self, indices):
        """Real coordinate vector(s) for slot index tuple(s) ``(..., n_slots)``."""
        return _unknowns(self.slots, self.generator.shape[1], np.asarray(indices))

    def symbols(self, indices):
        idx = np.asarray(indices)
        return np.stack([s.points[idx[..., k]] for k, s in enumerate(self.slots)], axis=-1)

    def metric(self, indices, observation=None):
        y = self.observation if observation is None else observation
        return residual_metric(self.generator, y, self.unknowns(indices))


def _unknowns(slots, n, idx):
    u = np.zeros(idx.shape[:-1] + (n,))
    for k, s in enumerate(slots):
        pts = s.points[idx[..., k]]
        u[..., s.dims[0]] = pts.real
        u[..., s.dims[1]] = pts.imag
    return u


def residual_metric(generator, y, u):
    r = np.asarray(y) - np.einsum("ij,...j->...i", generator, u)
    return np.sum(r * r, axis=-1)


def _slot_tables(slots):
    kmax = max(s.points.size for s in slots)
    pts = np.zeros((len(slots), kmax, 2))
    sizes = np.zeros(len(slots), dtype=np.int64)
    for k, s in enumerate(slots):
        sizes[k] = s.points.size
        pts[k, :sizes[k], 0] = s.points.real
        pts[k, :sizes[k], 1] = s.points.imag
    return pts, sizes


@dataclass(frozen=True)
class Decision:
    indices: np.ndarray  # per-slot alphabet indices
    symbols: np.ndarray
    metric: float


class SphereDecoder(BaseEstimator):
    """Exact ML detection by depth-first search with a shrinking radius.

    Parameters
    ----------
    rank_tol : float
        Relative threshold on ``|diag(R)|`` below which the generator is
        treated as rank deficient.
    """

    def __init__(self, rank_tol=RANK_RTOL):
        self.rank_tol = rank_tol

    def fit(self, generator, slots):
        g = check_real_matrix(generator, "generator")
        slots = tuple(slots)
        if g.shape[1] != 2 * len(slots) or g.shape[0] < g.shape[1]:
            raise DimensionMismatch("generator must be tall with two columns per slot")
        perm = np.array([d for s in slots for d in s.dims])
        q, r = np.linalg.qr(g[:, perm])
        diag = np.abs(np.diag(r))
        if diag.min() <= self.rank_tol * diag.max():
            raise RankDeficientGenerator("generator is not full column rank")
        self.generator_ = g
        self.slots_ = slots
        self.q_ = q
        self.r_ = np.ascontiguousarray(r)
        self.tables_ = _slot_tables(slots)
        return self

    def predict(self, observations):
        """Slot index decisions, shape ``(n_obs, n_slots)``."""
        check_is_fitted(self, "r_")
        y = check_observations(observations, self.generator_.shape[0])
        z = y @ self.q_
        nb = z.shape[0]
        rs = np.broadcast_to(self.r_, (nb,) + self.r_.shape)
        idx, _ = _sphere.sphere_search_batch(np.ascontiguousarray(rs), np.ascontiguousarray(z),
                                             *self.tables_)
        return idx

    def decide(self, observation):
        idx = self.predict(observation)[0]
        model = RealLinearModel(observation, self.generator_, self.slots_)
        return Decision(idx, model.symbols(idx), float(model.metric(idx)))


class MLEnumerator(BaseEstimator):
    """Brute-force ML over the full product alphabet (small models only)."""

    def __init__(self, max_hypotheses=MAX_HYPOTHESES, chunk=1 << 14):
        self.max_hypotheses = max_hypotheses
        self.chunk = chunk

    def fit(self, generator, slots):
        g = check_real_matrix(generator, "generator")
        slots = tuple(slots)
        total = int(np.prod([s.points.size for s in slots], dtype=np.float64))
        if total > self.max_hypotheses:
            raise SearchSpaceTooLarge(f"{total} hypotheses exceed the limit {self.max_hypotheses}")
        self.generator_ = g
        self.slots_ = slots
        self.n_hypotheses_ = total
        return self

    def _index_chunks(self):
        sizes = [s.points.size for s in self.slots_]
        # lexicographic order, slot 0 most significant
        it = product(*[range(m) for m in sizes])
        while True:
            block = list(_take(it, self.chunk))
            if not block:
                return
            yield np.array(block, dtype=np.int64)

    def predict(self, observations):
        check_is_fitted(self, "generator_")
        y = check_observations(observations, self.generator_.shape[0])
        best = np.full(y.shape[0], np.inf)
        best_idx = np.zeros((y.shape[0], len(self.slots_)), dtype=np.int64)
        n = self.generator_.shape[1]
        for idx in self._index_chunks():
            cand = _unknowns(self.slots_, n, idx) @ self.generator_.T  # (C, rows)
            d = ((y[:, None, :] - cand[None, :, :]) ** 2).sum(axis=-1)
            k = np.argmin(d, axis=1)
            dk = d[np.arange(y.shape[0]), k]
            better = dk < best  # strict: earlier chunks win ties
            best[better] = dk[better]
            best_idx[better] = idx[k[better]]
        return best_idx

    def decide(self, observation):
        idx = self.predict(observation)[0]
        model = RealLinearModel(observation, self.generator_, self.slots_)
        return Decision(idx, model.symbols(idx), float(model.metric(idx)))


def _take(it, n):
    for _, x in zip(range(n), it):
        yield x


class ZeroForcingDecoder(BaseEstimator):
    """Unconstrained least-squares inversion of a square (or tall) generator."""

    def __init__(self, rank_tol=RANK_RTOL):
        self.rank_tol = rank_tol

    def fit(self, generator, slots=None):
        g = check_real_matrix(generator, "generator")
        s = np.linalg.svd(g, compute_uv=False)
        if s[-1] <= self.rank_tol * s[0] or g.shape[0] < g.shape[1]:
            raise ChannelDegenerate("effective matrix is rank deficient")
        self.generator_ = g
        self.slots_ = None if slots is None else tuple(slots)
        self.pinv_ = np.linalg.pinv(g)
        return self

    def predict(self, observations):
        """Real coordinate estimates, shape ``(n_obs, n_columns)``."""
        check_is_fitted(self, "pinv_")
        y = check_observations(observations, self.generator_.shape[0])
        return y @ self.pinv_.T

    def predict_symbols(self, observations):
        u = self.predict(observations)
        return np.stack([u[:, s.dims[0]] + 1j * u[:, s.dims[1]] for s in self.slots_], axis=-1)


def sphere_decode(model):
    """Exact ML decision for a :class:`RealLinearModel`."""
    return SphereDecoder().fit(model.generator, model.slots).decide(model.observation)


def ml_enumerate(model, max_hypotheses=MAX_HYPOTHESES):
    return MLEnumerator(max_hypotheses).fit(model.generator, model.slots).decide(model.observation)


# Effective-symbol layout of the proposed code. Each entry is
# (symbol feeding Re(p), symbol feeding Im(p)), one-based; the first three
# are carried by the R system, the last three by the S system.
P_LAYOUT = ((1, 3), (2, 4), (6, 5), (5, 6), (3, 1), (4, 2))


def _lift_pair(r, s):
    """Real generator for the stacked R/S systems of both transmitters.

    Unknown ordering: Tx-1 symbols 1..6 then Tx-2 symbols 1..6, each as
    (real, imag) coordinates.
    """
    r = np.asarray(r, dtype=np.complex128)
    s = np.asarray(s, dtype=np.complex128)
    if r.shape[-2:] != (6, 6) or s.shape[-2:] != (6, 6):
        raise DimensionMismatch("R and S must be 6 x 6")
    g = np.zeros(r.shape[:-2] + (24, 24))
    for block, mat in ((0, r), (1, s)):
        rows = slice(12 * block, 12 * block + 12)
        for tx in range(2):
            for j in range(3):
                col = mat[..., :, tx * 3 + j]
                a, b = P_LAYOUT[3 * block + j]
                re_col = 12 * tx + 2 * (a - 1)
                im_col = 12 * tx + 2 * (b - 1) + 1
                g[..., rows, re_col] = np.concatenate([col.real, col.imag], axis=-1)
                g[..., rows, im_col] = np.concatenate([-col.imag, col.real], axis=-1)
    return g


def _split_positions():
    pos = []
    for block in (0, 1):
        p = np.empty(12, dtype=np.int64)
        for tx in range(2):
            for j in range(3):
                a, b = P_LAYOUT[3 * block + j]
                p[tx * 3 + j] = 12 * tx + 2 * (a - 1)
                p[6 + tx * 3 + j] = 12 * tx + 2 * (b - 1) + 1
        pos.append(p)
    return pos


_SPLIT_POS = _split_positions()
SPLIT_ORDER = tuple(np.argsort(p) for p in _SPLIT_POS)
SPLIT_POS = tuple(p[o] for p, o in zip(_SPLIT_POS, SPLIT_ORDER))


def split_lift(r, s):
    """The two 12 x 12 real blocks of :func:`_lift_pair`.

    The R rows only touch the coordinates ``SPLIT_POS[0]`` of the joint
    unknown vector and the S rows only ``SPLIT_POS[1]``; each block's
    columns are returned in ascending coordinate order.
    """
    out = []
    for mat, order in zip((r, s), SPLIT_ORDER):
        mat = np.asarray(mat, dtype=np.complex128)
        lift = np.empty(mat.shape[:-2] + (12, 12))
        lift[..., :6, :6], lift[..., :6, 6:] = mat.real, -mat.imag
        lift[..., 6:, :6], lift[..., 6:, 6:] = mat.imag, mat.real
        out.append(np.ascontiguousarray(lift[..., order]))
    return out[0], out[1]


def lift_observation(v_r, v_s):
    v_r = np.asarray(v_r)
    v_s = np.asarray(v_s)
    return np.concatenate([v_r.real, v_r.imag, v_s.real, v_s.imag], axis=-1)


def build_real_model(r, s, const, noise_var=1.0, v_r=None, v_s=None, gain=1.0):
    """Stack both 6 x 6 systems into one 24-dimensional real model.

    Every source symbol has its real part in one system and its imaginary
    part in the other (e.g. x1: real part in p1 through R, imaginary part
    in p5 through S), so only the joint model supports exact ML over a
    rotated alphabet.
    """
    g = gain * _lift_pair(r, s)
    if v_r is None:
        y = np.zeros(24)
    else:
        y = lift_observation(v_r, v_s)
    slots = tuple(SymbolSlot.of(const, (2 * k, 2 * k + 1)) for k in range(12))
    return RealLinearModel(y, g, slots, float(noise_var))


def zf_decode(r, s, v_r, v_s, gain=1.0, rank_tol=RANK_RTOL):
    """Symbol-by-symbol recovery ``p = R^-1 v`` and reassembly of the sources.

    Returns complex estimates of shape ``(2, 6)`` (transmitter, symbol).
    """
    out = np.zeros((2, 6), dtype=np.complex128)
    for block, mat, v in ((0, r, v_r), (1, s, v_s)):
        mat = np.asarray(mat, dtype=np.complex128)
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv[-1] <= rank_tol * sv[0]:
            raise ChannelDegenerate("effective matrix is rank deficient")
        p = np.linalg.solve(mat, np.asarray(v, dtype=np.complex128)) / gain
        for tx in range(2):
            for j in range(3):
                a, b = P_LAYOUT[3 * block + j]
                val = p[tx * 3 + j]
                out[tx, a - 1] += val.real
                out[tx, b - 1] += 1j * val.imag
    return out
