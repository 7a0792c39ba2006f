import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from levysup import (Brownian, bridge_argmax_density, bridge_argmax_sample, bridge_report,
                     convolution_identity_check, convolution_integral, pdf)


def test_brownian_convolution_identity(bm):
    rep = convolution_identity_check(bm, 1.0, [0.1, 0.5, 0.9], abs_tol=1e-8)
    assert rep.verdict, rep.failures()
    assert rep.rows[-1].kind == "flag"


@given(t=st.floats(0.2, 5.0), frac=st.floats(0.05, 0.95), mu=st.floats(-1.0, 1.0))
@settings(max_examples=25, deadline=None)
def test_convolution_integral_is_flat(t, frac, mu):
    spec = Brownian(1.0, mu)
    v, e = convolution_integral(spec, t, frac * t)
    assert v == pytest.approx(float(pdf(spec, t, 0.0)) / t, rel=1e-7)


def test_argmax_uniform_at_zero(bm):
    d = bridge_argmax_density(bm, 2.0, 0.0, [0.3, 1.0, 1.7])
    assert d == pytest.approx(0.5, rel=1e-9)


@pytest.mark.parametrize("y", [0.8, -0.5])
def test_argmax_density_normalised(bm, y):
    f = lambda s: float(bridge_argmax_density(bm, 1.0, y, s))
    tot = integrate.quad(f, 0, 0.5, limit=200)[0] + integrate.quad(f, 0.5, 1, limit=200)[0]
    assert tot == pytest.approx(1.0, abs=1e-8)


def test_argmax_time_reversal(bm):
    # reversing a bridge to y gives a bridge to -y shifted by -y
    s = np.array([0.2, 0.4, 0.7])
    a = bridge_argmax_density(bm, 1.0, 0.6, s)
    b = bridge_argmax_density(bm, 1.0, -0.6, 1.0 - s)
    assert a == pytest.approx(b, rel=1e-8)


def test_sampler_uniform_and_reproducible(bm):
    a = bridge_argmax_sample(bm, 1.0, 0.0, N=20_000, n_steps=512, seed=1)
    assert a.ks_p > 1e-3 and a.ks_p_refined > 1e-3
    assert a.refined.shape == a.samples.shape
    b = bridge_argmax_sample(bm, 1.0, 0.0, N=20_000, n_steps=512, seed=1, workers=2)
    assert np.array_equal(a.samples, b.samples)


def test_sampler_matches_density_off_zero(bm):
    y, s0 = 0.8, 0.5
    smp = bridge_argmax_sample(bm, 1.0, y, N=20_000, n_steps=1024, seed=2, refine=False)
    cdf = integrate.quad(lambda s: float(bridge_argmax_density(bm, 1.0, y, s)), 0, s0)[0]
    emp = np.mean(smp.samples <= s0)
    assert emp == pytest.approx(cdf, abs=4 * np.sqrt(cdf * (1 - cdf) / 20_000) + 2e-3)


def test_report_shape(bm):
    out = bridge_report(bm, N=5000, n_steps=256, seed=3)
    assert {"density_table", "ks_stat", "ks_p", "N"} <= set(out)
    assert len(out["density_table"]) == 5


def test_invalid(bm, cauchy):
    with pytest.raises(ValueError):
        bridge_argmax_density(bm, 1.0, 0.0, [1.0])
    with pytest.raises(ValueError):
        bridge_argmax_sample(cauchy)
    with pytest.raises(ValueError):
        convolution_identity_check(bm, 1.0, [0.0])
