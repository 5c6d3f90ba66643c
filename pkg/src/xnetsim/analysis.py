"""Verification instruments: rank census, case audit, determinant certificates, slopes."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (CertificateFailed, CpdZeroConstellation, InsufficientData,
                         SearchSpaceTooLarge, ZeroBerInTail)
from .numerics import RANK_RTOL
from .schemes import rs_from_hg

MAX_DIFFERENCE_VECTORS = 10**8


@dataclass
class RankSearchReport:
    code: str
    constellation: str
    theta: float
    pairs_checked: int = 0
    min_min_singular_value: float = np.inf
    failures: list = field(default_factory=list)
    n_failures: int = 0

    @property
    def passed(self):
        return self.n_failures == 0

    def to_dict(self, max_failures=20):
        return {
            "code": self.code,
            "constellation": self.constellation,
            "theta": self.theta,
            "pairs_checked": self.pairs_checked,
            "min_min_singular_value": self.min_min_singular_value,
            "n_failures": self.n_failures,
            "failures": [
                {"delta": [[z.real, z.imag] for z in d], "rank": r}
                for d, r in self.failures[:max_failures]
            ],
            "verdict": "PASS" if self.passed else "FAIL",
        }


def difference_alphabet(points, decimals=12):
    """Distinct values of ``u - v`` over the alphabet, zero first."""
    pts = np.asarray(getattr(points, "points", points), dtype=np.complex128)
    d = (pts[:, None] - pts[None, :]).ravel()
    key = np.round(d.real, decimals) + 1j * np.round(d.imag, decimals)
    _, first = np.unique(key, return_index=True)
    vals = d[np.sort(first)]
    vals = vals[np.argsort(np.abs(vals) > 0, kind="stable")]
    return vals


def _is_positive(z, eps=1e-12):
    return (z.real > eps) | ((np.abs(z.real) <= eps) & (z.imag > eps))


def rank_search(code, const, theta=None, rel_tol=RANK_RTOL, chunk=1 << 16,
                max_vectors=MAX_DIFFERENCE_VECTORS, keep_failures=1000):
    """Rank of every nonzero codeword difference, enumerated as symbol differences.

    By linearity ``X(s1) - X(s2) = X(s1 - s2)``, so it suffices to visit each
    ``delta`` in ``(S - S)^L`` once, and since ``rank(-D) = rank(D)`` only
    the representative whose first nonzero entry lies in the positive
    half-plane is kept.
    """
    diffs = difference_alphabet(const)
    k = diffs.size
    n_total = k ** code.l
    if (n_total - 1) // 2 > max_vectors:
        raise SearchSpaceTooLarge(f"{(n_total - 1) // 2} difference vectors exceed {max_vectors}")
    report = RankSearchReport(code.name, getattr(const, "name", "custom"),
                              code.theta if theta is None else float(theta))
    radix = k ** np.arange(code.l - 1, -1, -1)
    for start in range(1, n_total, chunk):
        flat = np.arange(start, min(start + chunk, n_total))
        idx = (flat[:, None] // radix[None, :]) % k
        delta = diffs[idx]
        nz = np.abs(delta) > 0
        first = delta[np.arange(delta.shape[0]), np.argmax(nz, axis=1)]
        keep = _is_positive(first)
        delta = delta[keep]
        if delta.size == 0:
            continue
        mats = code.encode(delta)
        s = np.linalg.svd(mats, compute_uv=False)
        smin = s[:, -1] if s.shape[1] >= code.m else np.zeros(s.shape[0])
        rank = np.sum(s > rel_tol * s[:, :1], axis=1)
        report.pairs_checked += delta.shape[0]
        report.min_min_singular_value = min(report.min_min_singular_value, float(smin.min()))
        bad = np.flatnonzero(rank < code.m)
        report.n_failures += bad.size
        room = keep_failures - len(report.failures)
        for b in bad[:max(room, 0)]:
            report.failures.append((delta[b].copy(), int(rank[b])))
    return report


def rank_check_pairs(code, const, n_pairs, rng, rel_tol=RANK_RTOL):
    """Ranks of ``X(s1) - X(s2)`` for random distinct codeword pairs.

    Returns ``(symbol differences, ranks)``; used to cross-check
    :func:`rank_search` through explicit codewords.
    """
    pts = const.points
    i1 = rng.integers(0, pts.size, (n_pairs, code.l))
    i2 = rng.integers(0, pts.size, (n_pairs, code.l))
    same = np.all(i1 == i2, axis=1)
    i2[same, 0] = (i2[same, 0] + 1) % pts.size
    s1, s2 = pts[i1], pts[i2]
    d = code.encode(s1) - code.encode(s2)
    s = np.linalg.svd(d, compute_uv=False)
    return s1 - s2, np.sum(s > rel_tol * s[:, :1], axis=1)


# Appendix-B style audit of the 3-antenna code ---------------------------------

@dataclass(frozen=True)
class CaseAudit:
    case: int
    det_a: complex
    det_b: complex
    predicted_nonzero: bool  # None when the case depends on theta

    @property
    def rank_certified(self):
        if self.case == 1:
            return abs(self.det_b) > 0
        if self.case == 2:
            return abs(self.det_a) > 0
        return None


def case_split_audit(delta, theta, code=None, tol=1e-12):
    """Label a symbol difference of the 3-antenna code by its case.

    The case is keyed on whether (dx1R, dx3R) and (dx5R, dx6R) vanish.
    Case 1 predicts ``|B| != 0`` (last three columns), case 2 predicts
    ``|A| != 0`` (first three), both for every theta. Cases 3 and 4 depend
    on theta and carry no prediction.
    """
    from .stbc import proposed_3tx_code

    d = np.asarray(delta, dtype=np.complex128).ravel()
    if d.size != 6:
        raise ValueError("the 3-antenna code carries 6 symbols")
    if np.all(np.abs(d) <= tol):
        raise ValueError("difference vector must be nonzero")
    zr = np.abs(d.real) <= tol
    zi = np.abs(d.imag) <= tol
    if np.any(zr != zi):
        raise CpdZeroConstellation("a component has exactly one zero coordinate")
    code = code or proposed_3tx_code(theta)
    mat = code.encode(d)
    det_a = complex(np.linalg.det(mat[:, :3]))
    det_b = complex(np.linalg.det(mat[:, 1:]))
    z13 = zr[0] and zr[2]
    z56 = zr[4] and zr[5]
    if z13 and z56:
        return CaseAudit(1, det_a, det_b, True)
    if not z13 and z56:
        return CaseAudit(2, det_a, det_b, True)
    return CaseAudit(3 if z13 else 4, det_a, det_b, None)


def case1_det_b(delta, theta):
    d = np.asarray(delta, dtype=np.complex128)
    x2r, x2i, x4r, x4i = d[1].real, d[1].imag, d[3].real, d[3].imag
    return np.exp(1j * theta) * (-x2r + 1j * x4i) * (-(x4r ** 2) - x2i ** 2)


def case2_det_a(delta):
    d = np.asarray(delta, dtype=np.complex128)
    x1r, x1i, x2r = d[0].real, d[0].imag, d[1].real
    x3r, x3i, x4i = d[2].real, d[2].imag, d[3].imag
    return (x3r + 1j * x1i) * (x1r ** 2 + x3i ** 2 + x2r ** 2 + x4i ** 2)


# Determinant certificates for the effective matrices --------------------------

def certificate_channels(theta):
    """Fixed effective-channel assignments ``((H_R, G_R), (H_S, G_S))``."""
    e = np.exp(1j * theta)
    h_r = np.array([[1, 0, 0], [0, 1, 1], [1, 0, 1]], dtype=np.complex128)
    g_r = np.array([[0, 0, 0], [1, 0, 0], [1, -e * e, 1]], dtype=np.complex128)
    h_s = np.eye(3, dtype=np.complex128)
    g_s = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 3 - e]], dtype=np.complex128)
    return (h_r, g_r), (h_s, g_s)


def appendix_c_certificates(theta, tol=1e-9, strict=True):
    """Evaluate det(R) and det(S) on the fixed assignments.

    Expected values are ``det(R) = -2`` and ``det(S) = 3 (3 - e^{j theta})``.
    Returns a dict; with ``strict`` a failing check raises
    :class:`CertificateFailed` carrying the same dict.
    """
    (h_r, g_r), (h_s, g_s) = certificate_channels(theta)
    r, _ = rs_from_hg(h_r, g_r, theta)
    _, s = rs_from_hg(h_s, g_s, theta)
    det_r = complex(np.linalg.det(r))
    det_s = complex(np.linalg.det(s))
    want_s = 3 * (3 - np.exp(1j * theta))
    out = {
        "theta": float(theta),
        "det_R": [det_r.real, det_r.imag],
        "det_R_expected": [-2.0, 0.0],
        "det_R_ok": bool(abs(det_r + 2) <= tol),
        "det_S": [det_s.real, det_s.imag],
        "det_S_expected": [want_s.real, want_s.imag],
        "det_S_ok": bool(abs(det_s - want_s) <= tol),
    }
    out["passed"] = out["det_R_ok"] and out["det_S_ok"]
    if strict and not out["passed"]:
        raise CertificateFailed(f"determinant certificate failed at theta={theta}", out)
    return out


# Alternative assignment for S with H = I: Re det(S) = 10 for every theta,
# so |det(S)| >= 10 and S is full rank on the whole circle.
S_WITNESS_G = np.array([[1, 1, 1], [1, -1, 1], [-1, -1, 0]], dtype=np.complex128)


def s_witness_det(theta):
    _, s = rs_from_hg(np.eye(3), S_WITNESS_G, theta)
    return complex(np.linalg.det(s))


# Diversity slope --------------------------------------------------------------

def _as_pair(p):
    if hasattr(p, "p_db"):
        return float(p.p_db), float(p.ber)
    return float(p[0]), float(p[1])


def diversity_slope(curve, tail_points=3):
    """Negated least-squares slope of log10(BER) against P_dB / 10.

    ``curve`` is a :class:`~xnetsim.harness.BerCurve` or an iterable of
    ``(p_db, ber)`` pairs.
    """
    pts = getattr(curve, "points", curve)
    pairs = sorted(_as_pair(p) for p in pts)
    if tail_points < 2 or len(pairs) < tail_points:
        raise InsufficientData(f"need at least {max(tail_points, 2)} points")
    tail = np.array(pairs[-tail_points:])
    if np.any(tail[:, 1] <= 0):
        raise ZeroBerInTail("BER is zero in the fitted tail")
    slope, _ = np.polyfit(tail[:, 0] / 10.0, np.log10(tail[:, 1]), 1)
    return float(-slope)
