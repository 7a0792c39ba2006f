import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given, settings, strategies as st

from levysup import (Brownian, ErrorBudgetExceeded, atom_mass, brownian_sup_density, kmr_bound,
                     ladder_functions, mc_sup_oracle, sup_cdf, sup_density)
from levysup.supremum import brownian_sup_cdf, time_rule

XS = np.array([0.1, 0.5, 1.0, 2.0, 3.0])


@pytest.mark.parametrize("spec", [Brownian(), Brownian(1.0, 0.7), Brownian(2.0, -0.4)],
                         ids=lambda s: s.label())
def test_brownian_matches_closed_form(spec):
    res = sup_density(spec, 1.0, XS)
    assert res.values == pytest.approx(brownian_sup_density(spec, 1.0, XS), rel=1e-10)
    assert res.total_mass_check == pytest.approx(1.0, abs=1e-7)
    assert res.atom_mass == 0.0
    cdf = sup_cdf(spec, 1.0, np.array([0.5, 1.0]))
    assert cdf == pytest.approx(brownian_sup_cdf(spec, 1.0, np.array([0.5, 1.0])), abs=1e-12)


def test_brownian_closed_form_values(bm):
    # 2 phi(x) without drift
    assert float(brownian_sup_density(bm, 1.0, 1.0)) == pytest.approx(0.4839414, abs=1e-7)
    assert float(brownian_sup_density(bm, 1.0, 0.0)) == pytest.approx(np.sqrt(2 / np.pi))


@given(r=st.floats(0.1, 0.9), t=st.floats(0.1, 10.0))
@settings(max_examples=30, deadline=None)
def test_time_rule_matched_singularity(r, t):
    # grading p = 1/(1 - r) makes (t - s)^{-r} smooth in the mapped variable
    s, w, s_min, u = time_rule(t, 1.0 / (1.0 - r), 8, gaps=True)
    assert np.all((s > 0) & (s <= t) & (u > 0))
    assert np.allclose(s + u, t, rtol=1e-15, atol=0)
    exact = t ** (1 - r) / (1 - r)
    assert w @ u ** -r == pytest.approx(exact, rel=1e-6)


def test_time_rule_integer_grading():
    s, w, s_min = time_rule(2.0, 2.0, 8)
    assert w.sum() + s_min == pytest.approx(2.0, rel=1e-14)
    assert w @ np.sqrt(s) == pytest.approx(2 / 3 * 2.0 ** 1.5, rel=1e-9)


@given(x=st.floats(0.01, 5.0), mu=st.floats(-1.0, 1.0))
@settings(max_examples=30, deadline=None)
def test_kmr_bound_dominates_cdf(x, mu):
    spec = Brownian(1.0, mu)
    assert float(brownian_sup_cdf(spec, 1.0, x)) <= float(kmr_bound(spec, 1.0, x)) + 1e-12


def test_dual_subordinator_drift_term(smd):
    dual = smd.dual()
    lf = ladder_functions(dual)
    full = sup_density(dual, 1.0, [0.5, 1.0])
    abl = sup_density(dual, 1.0, [0.5, 1.0], include_drift_term=False)
    assert full.total_mass_check == pytest.approx(1.0, abs=1e-6)
    short = full.total_mass_check - abl.total_mass_check
    assert short == pytest.approx(lf.d * float(lf.n_star_tail(1.0)), rel=1e-9)


def test_smd_atom(smd):
    lf = ladder_functions(smd)
    a = atom_mass(smd, 1.0)
    assert a == pytest.approx(lf.d_star * float(lf.n_tail(1.0)))
    orc = mc_sup_oracle(smd, 1.0, N=200_000, seed=5)
    assert abs(orc.extra["atom"] - a) <= 4 * orc.extra["atom_stderr"]
    assert atom_mass(Brownian(), 1.0) == 0.0


def test_smd_mass_small(smd, small_cfg):
    cfg = replace(small_cfg, smd_paths=100_000)
    res = sup_density(smd, 1.0, [0.5, 1.0], config=cfg, seed=2)
    assert res.atom_mass > 0
    assert abs(res.total_mass_check - 1.0) <= max(4 * res.mass_stderr, 1e-2)


def test_cauchy_small(cauchy, small_cfg):
    res = sup_density(cauchy, 1.0, [0.25, 1.0, 4.0], config=small_cfg, seed=1)
    assert np.all(res.values > 0)
    assert np.all(np.diff(res.values) < 0)
    assert res.total_mass_check == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ErrorBudgetExceeded, match="dominated by"):
        sup_density(cauchy, 1.0, [1.0], config=small_cfg, seed=1, tol=1e-9)


def test_brownian_oracle(bm):
    orc = mc_sup_oracle(bm, 1.0, N=200_000, seed=9, xs=XS)
    exact = brownian_sup_density(bm, 1.0, XS)
    assert np.all(np.abs(orc.curve.values - exact) <= 4 * orc.curve.stderr + 0.02 * exact)
    again = mc_sup_oracle(bm, 1.0, N=200_000, seed=9, xs=XS)
    assert np.array_equal(orc.counts, again.counts)


def test_invalid(bm):
    with pytest.raises(ValueError):
        sup_density(bm, 0.0, [1.0])
    with pytest.raises(ValueError):
        sup_density(bm, 1.0, [0.0])
    with pytest.raises(ValueError):
        mc_sup_oracle(bm, 1.0, N=0)
