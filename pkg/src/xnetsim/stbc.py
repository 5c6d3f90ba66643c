"""Linear dispersion STBCs with the column cancellation property.

A code maps ``L`` complex symbols to an ``M x T'`` matrix that is linear in
the real and imaginary parts of the symbols::

    X' = sum_k A_re[k] * Re(x_k) + A_im[k] * Im(x_k)

The cancellation spec lists, for every odd column ``p`` (zero-based even
index), a row permutation ``perm`` and gains ``alpha`` such that for every
input ``X'[r, p] + alpha[r] * conj(X'[perm[r], p + 1]) == 0``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import CodeMismatch


class CancelStep(NamedTuple):
    col: int  # zero-based even column p; the partner column is p + 1
    perm: tuple
    alpha: tuple


@dataclass(frozen=True, eq=False)
class LinearDispersionCode:
    name: str
    a_re: np.ndarray  # (L, M, T')
    a_im: np.ndarray  # (L, M, T')
    cancel_spec: tuple = None
    theta: float = 0.0

    @property
    def m(self):
        return self.a_re.shape[1]

    @property
    def t_prime(self):
        return self.a_re.shape[2]

    @property
    def l(self):
        return self.a_re.shape[0]

    @property
    def rate(self):
        """Complex symbols per channel use."""
        return self.l / self.t_prime

    def dispersion(self):
        """Real-parametrized dispersion stack ``(2L, M, T')``.

        Ordering is (x1R, x1I, x2R, x2I, ...).
        """
        out = np.empty((2 * self.l, self.m, self.t_prime), dtype=np.complex128)
        out[0::2] = self.a_re
        out[1::2] = self.a_im
        return out

    def encode(self, symbols):
        """Codeword matrices for symbols of shape ``(..., L)``."""
        s = np.asarray(symbols, dtype=np.complex128)
        if s.shape[-1] != self.l:
            raise ValueError(f"{self.name} encodes {self.l} symbols, got {s.shape[-1]}")
        return (np.einsum("...k,kmt->...mt", s.real, self.a_re)
                + np.einsum("...k,kmt->...mt", s.imag, self.a_im))

    def codeword(self, symbols):
        s = np.asarray(symbols, dtype=np.complex128).ravel()
        return Codeword(self.encode(s), s, self)

    def sigma2(self):
        """Noise gain ``|alpha|^2`` per (row, odd column) of the cancel spec."""
        return np.array([[abs(a) ** 2 for a in step.alpha] for step in self.cancel_spec])


@dataclass(frozen=True, eq=False)
class Codeword:
    matrix: np.ndarray
    source_symbols: np.ndarray
    code: LinearDispersionCode


def _from_entries(name, l, m, t, entries, theta, cancel_spec):
    """Build dispersion matrices from ``(row, col, scale, sr, kr, si, ki)`` tuples.

    Each tuple stands for the entry ``scale * (sr * x^{kr R} + j * si * x^{ki I})``
    with one-based symbol indices.
    """
    a_re = np.zeros((l, m, t), dtype=np.complex128)
    a_im = np.zeros((l, m, t), dtype=np.complex128)
    for r, c, scale, sr, kr, si, ki in entries:
        a_re[kr - 1, r, c] += scale * sr
        a_im[ki - 1, r, c] += scale * 1j * si
    return LinearDispersionCode(name, a_re, a_im, cancel_spec, float(theta))


def proposed_3tx_code(theta):
    """The 3-antenna, rate-3/2 code with the column cancellation property."""
    e = np.exp(1j * theta)
    entries = [
        (0, 0, 1, +1, 1, +1, 3), (0, 1, 1, -1, 2, +1, 4),
        (0, 2, e, +1, 5, +1, 6), (0, 3, e, -1, 3, +1, 1),
        (1, 0, 1, +1, 2, +1, 4), (1, 1, 1, +1, 1, -1, 3),
        (1, 2, e, +1, 4, +1, 2), (1, 3, e, +1, 5, -1, 6),
        (2, 0, e, +1, 6, +1, 5), (2, 1, e, -1, 6, +1, 5),
        (2, 2, 1, +1, 3, +1, 1), (2, 3, 1, -1, 4, +1, 2),
    ]
    spec = (
        CancelStep(0, (1, 0, 2), (-1.0, 1.0, e * e)),
        CancelStep(2, (1, 2, 0), (-e * e, e, e)),
    )
    return _from_entries("proposed3", 6, 3, 4, entries, theta, spec)


def sr_4tx_code(theta):
    """The 4-antenna code of Srinath and Rajan with a phase rotation ``theta``."""
    e = np.exp(1j * theta)
    entries = [
        (0, 0, 1, +1, 1, +1, 3), (0, 1, 1, -1, 2, +1, 4),
        (0, 2, e, +1, 5, +1, 7), (0, 3, e, -1, 6, +1, 8),
        (1, 0, 1, +1, 2, +1, 4), (1, 1, 1, +1, 1, -1, 3),
        (1, 2, e, +1, 6, +1, 8), (1, 3, e, +1, 5, -1, 7),
        (2, 0, e, +1, 7, +1, 5), (2, 1, e, -1, 8, +1, 6),
        (2, 2, 1, +1, 3, +1, 1), (2, 3, 1, -1, 4, +1, 2),
        (3, 0, e, +1, 8, +1, 6), (3, 1, e, +1, 7, -1, 5),
        (3, 2, 1, +1, 4, +1, 2), (3, 3, 1, +1, 3, -1, 1),
    ]
    spec = (
        CancelStep(0, (1, 0, 3, 2), (-1.0, 1.0, -e * e, e * e)),
        CancelStep(2, (1, 0, 3, 2), (-e * e, e * e, -1.0, 1.0)),
    )
    return _from_entries("sr4", 8, 4, 4, entries, theta, spec)


def alamouti_code():
    """``[[x1, -conj(x2)], [x2, conj(x1)]]``."""
    a_re = np.zeros((2, 2, 2), dtype=np.complex128)
    a_im = np.zeros((2, 2, 2), dtype=np.complex128)
    a_re[0, 0, 0], a_im[0, 0, 0] = 1, 1j
    a_re[0, 1, 1], a_im[0, 1, 1] = 1, -1j
    a_re[1, 1, 0], a_im[1, 1, 0] = 1, 1j
    a_re[1, 0, 1], a_im[1, 0, 1] = -1, 1j
    spec = (CancelStep(0, (1, 0), (-1.0, 1.0)),)
    return LinearDispersionCode("alamouti", a_re, a_im, spec, 0.0)


@dataclass(frozen=True)
class CancellationVerdict:
    passed: bool
    violation: tuple = None  # (real dimension index, column p, row) of the first failure
    max_residual: float = 0.0

    def __bool__(self):
        return self.passed


def verify_column_cancellation(code, tol=1e-12):
    """Check the cancellation identity on every dispersion matrix.

    The identity is real-linear in the symbol components, so holding for
    each dispersion matrix means it holds for every input.
    """
    if code.cancel_spec is None:
        raise ValueError(f"code {code.name} carries no cancellation spec")
    disp = code.dispersion()
    worst = 0.0
    first = None
    for step in code.cancel_spec:
        p = step.col
        for r in range(code.m):
            lhs = disp[:, r, p] + step.alpha[r] * np.conj(disp[:, step.perm[r], p + 1])
            err = np.abs(lhs)
            worst = max(worst, float(err.max()))
            bad = np.flatnonzero(err > tol)
            if bad.size and first is None:
                first = (int(bad[0]), p, r)
    return CancellationVerdict(first is None, first, worst)


def interleave_zero_columns(x_prime, destination):
    """Insert the zero columns that separate the two destinations in time.

    ``destination`` 1 (or "rx1") places each column pair in slots 3k, 3k+1
    and leaves 3k+2 empty; destination 2 empties slot 3k instead. Works on
    stacks ``(..., M, T')``.
    """
    x = getattr(x_prime, "matrix", x_prime)
    x = np.asarray(x, dtype=np.complex128)
    t = x.shape[-1]
    if t % 2:
        raise ValueError("T' must be even")
    dest = _dest(destination)
    out = np.zeros(x.shape[:-1] + (3 * t // 2,), dtype=np.complex128)
    k = np.arange(t // 2)
    off = 0 if dest == 1 else 1
    out[..., 3 * k + off] = x[..., 2 * k]
    out[..., 3 * k + off + 1] = x[..., 2 * k + 1]
    return out


def _dest(destination):
    d = {1: 1, 2: 2, "rx1": 1, "rx2": 2}.get(destination)
    if d is None:
        raise ValueError(f"destination must be rx1 or rx2, got {destination!r}")
    return d


def difference_matrix(c1, c2):
    if c1.code is not c2.code:
        raise CodeMismatch("codewords come from different codes")
    return c1.matrix - c2.matrix


def cancel_interference(y, code, destination):
    """Generic column-cancellation receiver.

    ``y`` has shape ``(..., M, 3T'/2)``; returns ``(..., M, T')``. At Rx-1 the
    interference sharing slot 3k+1 is rebuilt from the interference-only
    slot 3k+2; at Rx-2 the interference in slot 3k+1 is rebuilt from slot 3k
    through the inverse map ``w -> -conj(w) / conj(alpha)``.
    """
    y = np.asarray(y, dtype=np.complex128)
    dest = _dest(destination)
    out = np.empty(y.shape[:-1] + (code.t_prime,), dtype=np.complex128)
    for k, step in enumerate(code.cancel_spec):
        p = step.col
        perm = np.asarray(step.perm)
        alpha = np.asarray(step.alpha, dtype=np.complex128)
        if dest == 1:
            out[..., :, p] = y[..., :, 3 * k]
            out[..., :, p + 1] = y[..., :, 3 * k + 1] + alpha * np.conj(y[..., perm, 3 * k + 2])
        else:
            fixed = y[..., :, 3 * k + 1].copy()
            fixed[..., perm] += np.conj(y[..., :, 3 * k] / alpha)
            out[..., :, p] = fixed
            out[..., :, p + 1] = y[..., :, 3 * k + 2]
    return out


def processed_noise_var(code, destination):
    """Per-entry noise variance after :func:`cancel_interference` (unit input noise)."""
    dest = _dest(destination)
    var = np.ones((code.m, code.t_prime))
    for step in code.cancel_spec:
        g = np.abs(np.asarray(step.alpha)) ** 2
        if dest == 1:
            var[:, step.col + 1] = 1.0 + g
        else:
            var[np.asarray(step.perm), step.col] = 1.0 + 1.0 / g
    return var
