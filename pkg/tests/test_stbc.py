import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from xnetsim import stbc
from xnetsim.exceptions import CodeMismatch

from conftest import random_cmat

cplx = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


def _unit(l, k, val=1.0):
    s = np.zeros(l, dtype=complex)
    s[k - 1] = val
    return s


def test_proposed_code_shape_and_examples():
    th = 0.7
    e = np.exp(1j * th)
    code = stbc.proposed_3tx_code(th)
    assert (code.m, code.t_prime, code.l) == (3, 4, 6)
    assert code.rate == 1.5
    assert np.array_equal(code.encode(np.zeros(6)), np.zeros((3, 4)))
    x = code.encode(_unit(6, 1))
    want = np.zeros((3, 4), dtype=complex)
    want[0, 0] = want[1, 1] = 1
    assert np.allclose(x, want)
    x = code.encode(_unit(6, 5, 1j))
    want = np.zeros((3, 4), dtype=complex)
    want[2, 0] = want[2, 1] = 1j * e
    assert np.allclose(x, want)


def test_sr_code_examples():
    code = stbc.sr_4tx_code(0.4)
    assert (code.m, code.t_prime, code.l) == (4, 4, 8)
    assert np.array_equal(code.encode(np.zeros(8)), np.zeros((4, 4)))
    x = code.encode(_unit(8, 1))
    assert x[0, 0] == 1 and x[1, 1] == 1
    assert x[2, 2] == 0 and x[2, 3] == 0
    assert np.count_nonzero(x) == 2


def test_alamouti_examples():
    code = stbc.alamouti_code()
    assert np.allclose(code.encode([1, 0]), np.eye(2))
    assert np.allclose(code.encode([1j, 1]), [[1j, -1], [1, -1j]])


@given(cplx, cplx)
def test_alamouti_orthogonal(a, b):
    x = stbc.alamouti_code().encode([a, b])
    assert np.allclose(x @ x.conj().T, (abs(a) ** 2 + abs(b) ** 2) * np.eye(2), atol=1e-9)


@settings(max_examples=50)
@given(arrays(complex, 6, elements=cplx), arrays(complex, 6, elements=cplx),
       st.floats(0, 2 * np.pi))
def test_encoding_is_real_linear(a, b, th):
    code = stbc.proposed_3tx_code(th)
    assert np.allclose(code.encode(a + b), code.encode(a) + code.encode(b), atol=1e-9)
    assert np.allclose(code.encode(2.5 * a), 2.5 * code.encode(a), atol=1e-9)


@pytest.mark.parametrize("th", [0.0, np.pi / 4, 1.234, 3.0, 5.9])
def test_cancellation_verifier_passes(th):
    assert stbc.verify_column_cancellation(stbc.proposed_3tx_code(th)).passed
    assert stbc.verify_column_cancellation(stbc.sr_4tx_code(th)).passed


def test_alamouti_cancellation_and_sigma():
    code = stbc.alamouti_code()
    assert stbc.verify_column_cancellation(code).passed
    for c in (stbc.proposed_3tx_code(0.3), stbc.sr_4tx_code(0.3), code):
        assert np.allclose(c.sigma2(), 1.0)


def test_corrupted_code_fails():
    code = stbc.proposed_3tx_code(0.5)
    a_re = code.a_re.copy()
    a_re[0, 0, 0] = -a_re[0, 0, 0]
    bad = stbc.LinearDispersionCode("bad", a_re, code.a_im, code.cancel_spec, code.theta)
    v = stbc.verify_column_cancellation(bad)
    assert not v.passed and not v
    dim, col, row = v.violation
    assert col == 0 and row in (0, 1, 2)
    assert v.max_residual > 0.5


def test_verifier_requires_spec():
    code = stbc.proposed_3tx_code(0.5)
    bare = stbc.LinearDispersionCode("bare", code.a_re, code.a_im, None, 0.5)
    with pytest.raises(ValueError):
        stbc.verify_column_cancellation(bare)


def test_interleave_layouts(rng):
    x = random_cmat(rng, 3, 4)
    r1 = stbc.interleave_zero_columns(x, "rx1")
    r2 = stbc.interleave_zero_columns(x, "rx2")
    assert r1.shape == r2.shape == (3, 6)
    assert np.all(r1[:, [2, 5]] == 0)
    assert np.array_equal(r1[:, [0, 1, 3, 4]], x)
    assert np.all(r2[:, [0, 3]] == 0)
    assert np.array_equal(r2[:, [1, 2, 4, 5]], x)
    with pytest.raises(ValueError):
        stbc.interleave_zero_columns(x, "rx3")


def test_difference_matrix(rng):
    code = stbc.proposed_3tx_code(0.9)
    s1, s2 = random_cmat(rng, 6), random_cmat(rng, 6)
    c1, c2 = code.codeword(s1), code.codeword(s2)
    assert np.array_equal(stbc.difference_matrix(c1, c1), np.zeros((3, 4)))
    assert np.allclose(stbc.difference_matrix(c1, c2), code.encode(s1 - s2))
    other = stbc.proposed_3tx_code(0.9).codeword(s2)
    with pytest.raises(CodeMismatch):
        stbc.difference_matrix(c1, other)


def test_difference_layout_single_symbol():
    th = 0.8
    e = np.exp(1j * th)
    d = 0.6 - 1.1j
    delta = stbc.proposed_3tx_code(th).encode(_unit(6, 1, d))
    assert delta[0, 0] == pytest.approx(d.real)
    assert delta[1, 1] == pytest.approx(d.real)
    assert delta[0, 3] == pytest.approx(1j * d.imag * e)
    assert delta[2, 2] == pytest.approx(1j * d.imag)
    assert np.count_nonzero(np.abs(delta) > 1e-15) == 4


@pytest.mark.parametrize("make", [lambda: stbc.proposed_3tx_code(1.1),
                                  lambda: stbc.sr_4tx_code(1.1), stbc.alamouti_code])
def test_generic_receiver_removes_interference(make, rng):
    code = make()
    m = code.m
    h, g = random_cmat(rng, m, m), random_cmat(rng, m, m)
    a, b = random_cmat(rng, code.l), random_cmat(rng, code.l)
    # Rx-1: desired from a, interference b arrives through identity gains
    y1 = h @ stbc.interleave_zero_columns(code.encode(a), "rx1") \
        + stbc.interleave_zero_columns(code.encode(b), "rx2")
    assert np.allclose(stbc.cancel_interference(y1, code, "rx1"), h @ code.encode(a))
    y2 = g @ stbc.interleave_zero_columns(code.encode(a), "rx2") \
        + stbc.interleave_zero_columns(code.encode(b), "rx1")
    assert np.allclose(stbc.cancel_interference(y2, code, "rx2"), g @ code.encode(a))


def test_processed_noise_var():
    code = stbc.proposed_3tx_code(0.2)
    v1 = stbc.processed_noise_var(code, "rx1")
    assert np.allclose(v1[:, [0, 2]], 1) and np.allclose(v1[:, [1, 3]], 2)
    v2 = stbc.processed_noise_var(code, "rx2")
    assert np.allclose(v2[:, [0, 2]], 2) and np.allclose(v2[:, [1, 3]], 1)
