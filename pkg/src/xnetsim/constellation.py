"""Gray-labelled QAM constellations, rotation and coordinate product distance."""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .exceptions import BadLabelLength, NotAMember, TooFewPoints, UnsupportedOrder

# Rotation that gives square QAM a nonzero coordinate product distance.
PHI_CPD = float(np.arctan(2.0) / 2.0)

_GRID = {4: (2, 2), 8: (4, 2), 16: (4, 4)}
NAMES = {"qpsk": 4, "qam8": 8, "qam16": 16}


def _gray_pam(n):
    # index i carries amplitude (n-1) - 2i and label gray(i)
    idx = np.arange(n)
    return (n - 1) - 2 * idx, idx ^ (idx >> 1)


@dataclass(frozen=True, eq=False)
class Constellation:
    """A finite unit-energy constellation with one bit label per point.

    ``labels[k]`` is the integer whose ``bits_per_symbol`` binary digits
    (most significant first) label ``points[k]``.
    """

    points: np.ndarray
    labels: np.ndarray
    name: str = "custom"
    phi: float = 0.0
    _by_label: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128).ravel()
        lab = np.asarray(self.labels, dtype=np.int64).ravel()
        if pts.size != lab.size:
            raise ValueError("points and labels differ in length")
        m = pts.size
        if m < 2 or m & (m - 1):
            raise ValueError("constellation size must be a power of two >= 2")
        if sorted(lab.tolist()) != list(range(m)):
            raise ValueError("labels must be a bijection onto {0, ..., M-1}")
        order = np.empty(m, dtype=np.int64)
        order[lab] = np.arange(m)
        pts.setflags(write=False)
        lab.setflags(write=False)
        order.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "_by_label", order)

    def __len__(self):
        return self.points.size

    @property
    def bits_per_symbol(self):
        return int(self.points.size).bit_length() - 1

    @property
    def energy(self):
        return float(np.mean(np.abs(self.points) ** 2))

    def bit_table(self):
        """``(M, b)`` uint8 array; row k holds the bits of ``points[k]``."""
        b = self.bits_per_symbol
        shifts = np.arange(b - 1, -1, -1)
        return ((self.labels[:, None] >> shifts) & 1).astype(np.uint8)

    def bits_to_point(self, bits):
        bits = [int(x) for x in bits]
        if len(bits) != self.bits_per_symbol:
            raise BadLabelLength(f"expected {self.bits_per_symbol} bits, got {len(bits)}")
        if any(x not in (0, 1) for x in bits):
            raise BadLabelLength("bits must be 0 or 1")
        label = 0
        for x in bits:
            label = (label << 1) | x
        return complex(self.points[self._by_label[label]])

    def index_of(self, point, atol=1e-12):
        d = np.abs(self.points - complex(point))
        k = int(np.argmin(d))
        if d[k] > atol:
            raise NotAMember(f"{point!r} is not a constellation point")
        return k

    def point_to_bits(self, point):
        label = int(self.labels[self.index_of(point)])
        b = self.bits_per_symbol
        return tuple((label >> s) & 1 for s in range(b - 1, -1, -1))

    def normalized(self):
        """Copy scaled to unit average energy (idempotent)."""
        scale = 1.0 / np.sqrt(self.energy)
        return Constellation(self.points * scale, self.labels, self.name, self.phi)

    def rotated(self, phi):
        return Constellation(self.points * np.exp(1j * phi), self.labels, self.name, self.phi + phi)


def make_qam(order, phi=0.0):
    """Rectangular Gray-labelled QAM of the given order, rotated by ``phi``.

    Orders 4, 8 (4x2 grid) and 16 are supported. Points are scaled to unit
    average energy; the imaginary-axis label bits come first.
    """
    if order not in _GRID:
        raise UnsupportedOrder(f"QAM order {order} not in {sorted(_GRID)}")
    n_re, n_im = _GRID[order]
    amp_re, lab_re = _gray_pam(n_re)
    amp_im, lab_im = _gray_pam(n_im)
    bits_re = int(n_re).bit_length() - 1
    pts = (amp_re[None, :] + 1j * amp_im[:, None]).ravel().astype(np.complex128)
    labels = ((lab_im[:, None] << bits_re) | lab_re[None, :]).ravel()
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    name = {4: "qpsk", 8: "qam8", 16: "qam16"}[order]
    return Constellation(pts * np.exp(1j * phi), labels, name, float(phi))


def by_name(name, phi=0.0):
    """Constellation from its config name ("qpsk", "qam8", "qam16")."""
    try:
        order = NAMES[name]
    except KeyError:
        raise UnsupportedOrder(f"unknown constellation {name!r}") from None
    return make_qam(order, phi)


def cpd(const):
    """Coordinate product distance: min over distinct pairs of |dRe|*|dIm|."""
    pts = np.asarray(getattr(const, "points", const), dtype=np.complex128).ravel()
    if pts.size < 2:
        raise TooFewPoints("cpd needs at least two points")
    i, j = np.triu_indices(pts.size, k=1)
    d = pts[i] - pts[j]
    return float(np.min(np.abs(d.real) * np.abs(d.imag)))


def cpd_bruteforce(points):
    """Pairwise enumeration used as an independent check of :func:`cpd`."""
    best = None
    for u, v in combinations(list(points), 2):
        val = abs(u.real - v.real) * abs(u.imag - v.imag)
        best = val if best is None else min(best, val)
    if best is None:
        raise TooFewPoints("cpd needs at least two points")
    return best
