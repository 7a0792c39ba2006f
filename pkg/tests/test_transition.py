import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from levysup import (Brownian, Cauchy, Stable, SubordinatorMinusDrift, abs_cf_integral, pdf,
                     pdf_at_zero_curve, pdf_with_error, sym_pdf_at_zero)
from levysup.numerics import panel_rule
from levysup.transition import CLOSED_FORM, FOURIER, AccuracyError


def test_brownian_values(bm):
    assert pdf(bm, 1.0, 0.0) == pytest.approx(0.3989423, abs=1e-7)
    curve = pdf_at_zero_curve(bm, [1, 2, 4])
    assert curve.values == pytest.approx([0.398942, 0.282095, 0.199471], abs=1e-6)


def test_cauchy_values(cauchy):
    assert pdf_at_zero_curve(cauchy, [1, 2]).values == pytest.approx([0.318310, 0.159155],
                                                                      abs=1e-6)
    x = np.array([-3.0, 0.5, 2.0])
    assert pdf(cauchy, 1.0, x) == pytest.approx(1 / (np.pi * (1 + x ** 2)), rel=1e-12)


def test_fourier_matches_closed_form(cauchy):
    x = np.linspace(-8, 8, 33)
    v, err, method = pdf_with_error(cauchy, 0.7, x, method=FOURIER)
    exact, _, m2 = pdf_with_error(cauchy, 0.7, x)
    assert method == FOURIER and m2 == CLOSED_FORM
    assert np.max(np.abs(v - exact)) < 1e-8
    assert np.all(err < 1e-6)


@pytest.mark.parametrize("alpha,beta", [(1.5, 0.5), (0.7, 0.3), (1.8, -1.0), (0.5, -0.4)])
def test_fourier_matches_scipy_levy_stable(alpha, beta):
    # scipy's default S1 parameterisation has the same characteristic function
    x = np.array([-3.0, -0.5, 0.3, 2.0, 10.0])
    ref = stats.levy_stable.pdf(x, alpha, beta)
    assert np.max(np.abs(pdf(Stable(alpha, beta), 1.0, x) - ref)) < 1e-9


@pytest.mark.parametrize("spec", [Stable(1.5, 0.5), Stable(1.8, -1.0)])
def test_fourier_density_is_a_density(spec):
    x, w = panel_rule(np.concatenate([-np.geomspace(1e4, 1e-4, 80), [0.0],
                                      np.geomspace(1e-4, 1e4, 80)]), 8)
    v = pdf(spec, 1.0, x)
    assert np.all(v >= 0)
    # mass beyond |x| = 1e4 is below 1e-5 for alpha >= 1.5
    assert float(w @ v) == pytest.approx(1.0, abs=1e-4)


def test_large_x_tail_decay():
    s = Stable(1.5, 0.5)
    v = pdf(s, 1.0, np.array([1e3, 1e4]))
    assert v[0] / v[1] == pytest.approx(10 ** 2.5, rel=0.02)


def test_symmetry(cauchy):
    s = Stable(1.3, 0.0, 2.0)
    x = np.array([0.3, 1.0, 4.0])
    assert pdf(s, 1.0, x) == pytest.approx(pdf(s, 1.0, -x), rel=1e-9)
    assert pdf(cauchy, 2.0, x) == pytest.approx(pdf(cauchy, 2.0, -x), rel=0, abs=0)


@pytest.mark.parametrize("spec", [Brownian(1.0, 0.3), Cauchy(1.0)])
def test_chapman_kolmogorov_by_convolution(spec):
    y, w = panel_rule(np.linspace(-400, 400, 1601), 8)
    for x in (0.0, 1.3):
        conv = w @ (pdf(spec, 0.4, y) * pdf(spec, 0.6, x - y))
        # Cauchy tails beyond |y| = 400 miss about 2 * 0.4 * 0.6 / (pi * 400^2) ... negligible
        assert conv == pytest.approx(float(pdf(spec, 1.0, x)), abs=5e-6)


@given(st.sampled_from([Brownian(1.0, 0.5), Cauchy(1.0), Stable(1.5, 0.5)]),
       st.floats(0.1, 5.0), st.floats(-10, 10))
@settings(max_examples=40, deadline=None)
def test_uniform_bound(spec, t, x):
    assert float(pdf(spec, t, x)) <= float(abs_cf_integral(spec, t)) * (1 + 1e-9) + 1e-12


def test_sym_pdf_at_zero(bm, cauchy):
    assert float(sym_pdf_at_zero(bm, 1.0)) == pytest.approx(1 / np.sqrt(4 * np.pi))
    assert float(sym_pdf_at_zero(cauchy, 1.0)) == pytest.approx(1 / (2 * np.pi))


def test_monotone_at_zero():
    v = pdf_at_zero_curve(Stable(1.5, 0.5), np.geomspace(0.1, 10, 9)).values
    assert np.all(np.diff(v) <= 1e-12)


def test_integrability_certificate():
    # int exp(-t Re Psi) over widening windows converges under (H1)
    for spec in (Stable(0.7, 0.2), SubordinatorMinusDrift(0.5)):
        for t in (0.1, 1.0):
            vals = []
            for L in (1e2, 1e4, 1e6):
                xi, w = panel_rule(np.geomspace(1e-8, L, 400), 8)
                vals.append(2 * w @ np.exp(-t * spec.char_exponent(xi).real))
            assert abs(vals[2] - vals[1]) < 1e-3 * vals[2]


def test_bad_time(bm):
    with pytest.raises(ValueError):
        pdf(bm, 0.0, 1.0)


def test_tolerance_raises():
    with pytest.raises(AccuracyError):
        pdf(Stable(1.5, 0.5), 1.0, 1.0, tol=1e-30)
