import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levysup import (Brownian, Cauchy, Stable, SubordinatorMinusDrift, UnavailableError,
                     excursion_tail, kappa_time, ladder_functions)
from levysup.numerics import panel_rule

CATALOG = [Brownian(), Brownian(1.0, 0.5), Brownian(2.0, -0.5), Cauchy(), Cauchy(2.0),
           Stable(1.5, 0.5), Stable(0.7, -0.3), SubordinatorMinusDrift(0.5),
           SubordinatorMinusDrift(0.3, 2.0, 0.5), SubordinatorMinusDrift(0.5).dual()]


@pytest.mark.parametrize("spec", CATALOG, ids=lambda s: s.label())
@given(q=st.floats(1e-3, 1e3))
@settings(max_examples=25, deadline=None)
def test_wiener_hopf_product(spec, q):
    lf = ladder_functions(spec)
    assert float(lf.kappa_time(q) * lf.kappa_star_time(q)) == pytest.approx(q, rel=1e-9)


@pytest.mark.parametrize("spec", CATALOG, ids=lambda s: s.label())
def test_kappa_is_laplace_transform_of_excursion_tail(spec):
    # kappa(q) = d q + q int_0^inf e^{-qt} n(t < zeta) dt
    lf = ladder_functions(spec)
    a = 1e-10
    t, w = panel_rule(np.geomspace(a, 1e4, 200), 12)

    def head(n):
        # int_0^a n dt for a local power law n ~ t^-g
        g = -np.log2(float(n(a) / n(a / 2)))
        return a * float(n(a)) / (1 - g)

    for q in (0.3, 1.0, 3.0):
        lap = q * (w @ (np.exp(-q * t) * lf.n_tail(t)) + head(lf.n_tail)) + lf.d * q
        lap_s = q * (w @ (np.exp(-q * t) * lf.n_star_tail(t)) + head(lf.n_star_tail)) + lf.d_star * q
        assert lap == pytest.approx(float(lf.kappa_time(q)), rel=1e-4)
        assert lap_s == pytest.approx(float(lf.kappa_star_time(q)), rel=1e-4)


def test_brownian_closed_forms(bm):
    lf = ladder_functions(bm)
    assert float(lf.h(1.0)) == pytest.approx(np.sqrt(2))
    assert float(lf.h_prime(0.3)) == pytest.approx(np.sqrt(2))
    assert float(lf.n_tail(1.0)) == pytest.approx(1 / np.sqrt(np.pi))
    assert float(lf.n_star_tail(4.0)) == pytest.approx(0.5 / np.sqrt(np.pi))
    assert lf.h_zero() == 0.0


def test_cauchy_closed_forms(cauchy):
    lf = ladder_functions(cauchy)
    x = np.array([0.25, 1.0, 4.0])
    assert lf.h(x) == pytest.approx(2 * np.sqrt(x / np.pi))
    assert float(lf.h_prime(1.0)) == pytest.approx(0.5642, abs=1e-4)
    assert float(lf.n_tail(1.0)) == pytest.approx(1 / np.sqrt(np.pi))


@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0))
@settings(max_examples=40, deadline=None)
def test_stable_scaling(t, x):
    s = Stable(1.5, 0.5)
    lf = ladder_functions(s)
    rho, a = lf.rho, s.alpha
    assert float(lf.n_tail(2 * t) / lf.n_tail(t)) == pytest.approx(2 ** -rho, rel=1e-9)
    assert float(lf.n_star_tail(2 * t) / lf.n_star_tail(t)) == pytest.approx(2 ** -(1 - rho),
                                                                             rel=1e-9)
    assert float(lf.h(2 * x) / lf.h(x)) == pytest.approx(2 ** (a * rho), rel=1e-9)
    assert float(lf.h_star(2 * x) / lf.h_star(x)) == pytest.approx(2 ** (a * (1 - rho)),
                                                                   rel=1e-9)


@pytest.mark.parametrize("spec", CATALOG, ids=lambda s: s.label())
def test_monotonicity(spec):
    lf = ladder_functions(spec)
    t = np.geomspace(1e-3, 1e3, 40)
    x = np.geomspace(1e-3, 1e2, 40)
    # tails may level off at n(zeta = inf) > 0 and h* is bounded under drift to +inf
    for f, a, sign in ((lf.n_tail, t, -1), (lf.n_star_tail, t, -1), (lf.h, x, 1),
                       (lf.h_star, x, 1), (lf.kappa_time, t, 1)):
        v = np.asarray(f(a))
        assert np.all(sign * np.diff(v) >= -(1e-10 * np.abs(v[1:]) + 1e-12))


def test_h_prime_is_derivative():
    for spec in (Stable(1.5, 0.5), SubordinatorMinusDrift(0.5), SubordinatorMinusDrift(0.5).dual()):
        lf = ladder_functions(spec)
        x, d = 0.7, 1e-5
        fd = (lf.h(x + d) - lf.h(x - d)) / (2 * d)
        assert float(lf.h_prime(x)) == pytest.approx(float(fd), rel=1e-5)


def test_smd_atom_and_duality(smd):
    lf = ladder_functions(smd)
    dual = ladder_functions(smd.dual())
    assert lf.rho is None and lf.d == 0.0 and lf.d_star > 0
    # (0, inf) irregular: h(0) is the ladder drift rather than zero
    assert lf.h_zero() == pytest.approx(lf.d_star)
    assert dual.d == pytest.approx(lf.d_star)
    assert float(dual.n_tail(1.0)) == pytest.approx(float(lf.n_star_tail(1.0)))
    assert float(dual.h(0.5)) == pytest.approx(float(lf.h_star(0.5)))


def test_module_helpers(cauchy):
    assert float(excursion_tail(cauchy, 1.0)) == pytest.approx(1 / np.sqrt(np.pi))
    assert float(kappa_time(cauchy, 4.0)) == pytest.approx(2.0)


def test_table_rows(bm):
    rows = ladder_functions(bm).table()
    assert all(len(r) == 4 for r in rows)
    assert {"kappa", "n_tail", "h_prime"} <= {r[0] for r in rows}
