import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levysup import (Brownian, Row, VerificationReport, bound_suite, chapman_kolmogorov_check,
                     continuity_probe, duality_check, verify_bounds, verify_corollary,
                     verify_integrability, verify_large_t, verify_small_x)
from levysup.ladder import UnavailableError
from levysup.report import EQ, FLAG, GE, INFO, LE, flag_row, info_row, rel_row

finite = st.floats(-1e6, 1e6)
errs = st.floats(0.0, 1e3)


@given(c=finite, t=finite, e=errs, tol=st.floats(0.0, 1e3))
def test_row_semantics(c, t, e, tol):
    slack = max(tol, 3 * e)
    assert Row({}, c, t, e, tol, EQ).passed == (abs(c - t) <= slack)
    assert Row({}, c, t, e, tol, LE).passed == (c <= t + slack)
    assert Row({}, c, t, e, tol, GE).passed == (c >= t - slack)
    # EQ is the conjunction of the one-sided kinds
    eq = Row({}, c, t, e, tol, EQ).passed
    assert eq == (Row({}, c, t, e, tol, LE).passed and Row({}, c, t, e, tol, GE).passed)


@given(c=st.floats(allow_nan=True, allow_infinity=True), t=finite)
def test_nonfinite_never_pass_but_info_does(c, t):
    if not math.isfinite(c):
        assert not Row({}, c, t, 0.0).passed
    assert info_row({}, c, t).passed


def test_rel_and_flag_rows():
    assert rel_row({}, 1.04, 1.0, 0.05).passed
    assert not rel_row({}, 1.06, 1.0, 0.05).passed
    assert rel_row({}, 1.06, 1.0, 0.05, err=0.03).passed
    assert flag_row({}, True).passed and not flag_row({}, False).passed
    assert flag_row({}, True).kind == FLAG and info_row({}, 1, 0).kind == INFO


def test_report_json_schema(bm):
    rep = VerificationReport("x", bm, [Row({"t": 1.0}, 1.0, 1.0, float("nan")),
                                        info_row({}, float("inf"), 0.0)], 1.23, 7, 2)
    d = json.loads(rep.to_json())
    assert set(d) == {"name", "spec", "rows", "verdict", "runtime_s", "seed", "workers", "notes"}
    assert d["rows"][0]["err"] is None and d["rows"][1]["computed"] is None
    assert set(d["rows"][0]) >= {"input", "computed", "target", "err", "pass", "kind", "tol"}
    assert d["verdict"] is True and d["runtime_s"] == 1.23
    assert json.loads(rep.to_json(include_runtime=False))["runtime_s"] is None
    assert not VerificationReport("empty", None).verdict
    assert "PASS" in rep.summary()


def test_brownian_small_x(bm):
    rep = verify_small_x(bm, seed=1)
    assert rep.verdict, rep.failures()
    assert any(r.kind == FLAG for r in rep.rows)


def test_brownian_large_t_and_smd_unavailable(bm, smd):
    rep = verify_large_t(bm)
    assert rep.verdict, rep.failures()
    with pytest.raises(UnavailableError, match="Spitzer"):
        verify_large_t(smd)


def test_brownian_bounds(bm):
    rep = verify_bounds(bm)
    assert rep.verdict, rep.failures()
    info = [r for r in rep.rows if r.kind == INFO]
    # the strict ordering c1 <= c2 fails for Brownian motion and is only reported
    assert info and info[0].computed > 0


def test_brownian_corollary(bm):
    rep = verify_corollary(bm)
    assert rep.verdict, rep.failures()


def test_integrability_brownian(bm):
    rep = verify_integrability(bm)
    assert rep.verdict, rep.failures()


def test_continuity(bm):
    rep = continuity_probe(bm)
    assert rep.verdict, rep.failures()


@pytest.mark.parametrize("spec", [Brownian(), Brownian(1.5, 0.4), Brownian(1.0, -0.6)],
                         ids=lambda s: s.label())
def test_brownian_bound_suite(spec):
    rep = bound_suite(spec)
    assert rep.verdict, rep.failures()


@pytest.mark.parametrize("spec", [Brownian(), Brownian(1.0, 0.4)], ids=lambda s: s.label())
def test_brownian_duality_and_ck(spec):
    d = duality_check(spec, abs_tol=1e-10)
    c = chapman_kolmogorov_check(spec, abs_tol=1e-8)
    assert d.verdict and c.verdict
    assert len(d.rows) == 3 and len(c.rows) == 2


def test_seed_recorded(bm):
    rep = verify_small_x(bm, seed=11)
    assert rep.seed == 11
    assert json.loads(rep.to_json())["seed"] == 11


def test_bounds_drift_minus_subordinator_support(smd):
    dual = smd.dual()
    # Xbar_1 < b: the lower constant vanishes on a grid reaching x = b t0
    assert not verify_bounds(dual, x0=1.0, t0=1.0).verdict
    rep = verify_bounds(dual, x0=0.8, t0=1.0)
    assert rep.verdict and rep.notes["c1_hat"] > 0.5
    assert "support" in rep.notes
