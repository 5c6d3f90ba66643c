"""X-network channel draws and complex Gaussian noise."""

from dataclasses import dataclass

import numpy as np

from .exceptions import ChannelDegenerate
from .numerics import batch_inverse

_MAX_ATTEMPTS = 8


def make_rng(seed):
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))


def derived_rng(seed, *keys):
    """Independent generator for a sub-stream identified by integer ``keys``.

    The stream depends only on ``(seed, keys)``, so a trial block draws the
    same numbers whichever worker runs it.
    """
    entropy = [int(seed) & (2**64 - 1)] + [int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def crandn(rng, shape, variance=1.0):
    """i.i.d. CN(0, variance) samples."""
    std = np.sqrt(variance / 2.0)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def awgn(rng, rows, cols, variance=1.0):
    if variance <= 0:
        raise ValueError("noise variance must be positive")
    return crandn(rng, (rows, cols), variance)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """The four M x M gains of the (2, 2, M) X-network.

    ``h[i, j]`` (zero-based) maps Tx-(i+1) to Rx-(j+1).
    """

    h: np.ndarray

    @property
    def m(self):
        return self.h.shape[-1]

    def __getitem__(self, ij):
        return self.h[ij]

    @classmethod
    def from_blocks(cls, h11, h12, h21, h22):
        h = np.array([[h11, h12], [h21, h22]], dtype=np.complex128)
        return cls(h)


def sample_channels(rng, m, n):
    """Draw ``n`` realizations as one ``(n, 2, 2, m, m)`` array.

    Draws with a numerically singular block are replaced (up to eight
    rounds), which is a probability-zero event for Gaussian fading.
    """
    h = crandn(rng, (n, 2, 2, m, m))
    for _ in range(_MAX_ATTEMPTS):
        _, bad = batch_inverse(h)
        bad = bad.reshape(n, 4).any(axis=1)
        if not bad.any():
            return h
        h[bad] = crandn(rng, (int(bad.sum()), 2, 2, m, m))
    raise ChannelDegenerate("could not draw a nonsingular channel")


def sample_channel(rng, m):
    if m < 1:
        raise ValueError("m must be >= 1")
    return ChannelRealization(sample_channels(rng, m, 1)[0])
