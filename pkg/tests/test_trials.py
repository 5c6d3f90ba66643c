import numpy as np
import pytest

from xnetsim import constellation, trials


@pytest.mark.parametrize("name,phi,theta", [
    ("qpsk", constellation.PHI_CPD, np.pi / 4),
    ("qpsk", 0.0, 0.0),
    ("qpsk", 0.3, 1.1),
    ("qam8", 0.2, np.pi / 4),
])
@pytest.mark.parametrize("p_db", [8.0, 14.0, 20.0])
def test_fused_chain_matches_numpy_pipeline(name, phi, theta, p_db):
    const = constellation.by_name(name, phi)
    p = 10 ** (p_db / 10)
    fused = trials.ljj3_block(np.random.default_rng(11), 300, p, const, theta)
    ref = trials.ljj3_block_reference(np.random.default_rng(11), 300, p, const, theta)
    np.testing.assert_array_equal(fused, ref)


def test_errors_fall_with_power():
    const = constellation.by_name("qpsk", constellation.PHI_CPD)
    counts = [trials.ljj3_block(np.random.default_rng(3), 400, 10 ** (d / 10), const, np.pi / 4).sum()
              for d in (4.0, 10.0, 16.0)]
    assert counts[0] > counts[1] > counts[2]


def test_bits_per_trial():
    assert trials.bits_per_trial("ljj3", constellation.by_name("qpsk")) == 48
    assert trials.bits_per_trial("js3", constellation.by_name("qam16")) == 48
