import numpy as np
import pytest
from scipy import stats

from xnetsim.channel import (ChannelRealization, awgn, crandn, derived_rng, make_rng,
                             sample_channel, sample_channels)


def test_shapes_and_determinism():
    a = sample_channel(make_rng(5), 3)
    b = sample_channel(make_rng(5), 3)
    assert a.h.shape == (2, 2, 3, 3)
    assert np.array_equal(a.h, b.h)
    assert a.m == 3
    assert np.all(np.isfinite(a.h))


def test_entry_variance():
    h = sample_channels(make_rng(1), 3, 100_000 // 36 + 1)
    v = np.var(h.ravel())
    assert 0.98 <= v <= 1.02
    one = sample_channels(make_rng(2), 1, 100_000)
    assert 0.98 <= np.var(one.ravel()) <= 1.02


def test_awgn_moments_and_shape():
    rng = make_rng(3)
    assert awgn(rng, 3, 6).shape == (3, 6)
    x = awgn(rng, 1000, 1000, 1.0)
    assert abs(np.mean(np.abs(x) ** 2) - 1.0) <= 0.01
    with pytest.raises(ValueError):
        awgn(rng, 2, 2, 0.0)


def test_awgn_variance_scaling_ks():
    a = awgn(make_rng(4), 1, 20000, 2.0).ravel() / np.sqrt(2)
    b = awgn(make_rng(5), 1, 20000, 1.0).ravel()
    assert stats.ks_2samp(a.real, b.real).pvalue > 1e-3
    assert stats.ks_2samp(a.imag, b.imag).pvalue > 1e-3


def test_derived_streams_are_keyed():
    a = derived_rng(9, 0, 1).standard_normal(4)
    b = derived_rng(9, 0, 1).standard_normal(4)
    c = derived_rng(9, 1, 0).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_realization_indexing():
    blocks = [np.eye(2) * k for k in range(1, 5)]
    ch = ChannelRealization.from_blocks(*blocks)
    assert np.array_equal(ch[0, 1], 2 * np.eye(2))
    assert np.array_equal(ch[1, 0], 3 * np.eye(2))


def test_crandn_circular():
    x = crandn(make_rng(6), 200_000)
    assert abs(np.mean(x.real ** 2) - 0.5) < 0.01
    assert abs(np.mean(x.real * x.imag)) < 0.01
