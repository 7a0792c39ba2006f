import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levysup import (Brownian, Cauchy, Stable, SubordinatorMinusDrift,
                     UnsupportedClassification, classify_regularity, spec_from_dict, spitzer_rho)
from levysup.processes import zolotarev_rho

specs = st.one_of(
    st.builds(Brownian, st.floats(0.2, 3.0), st.floats(-2.0, 2.0)),
    st.builds(Stable, st.floats(1.05, 1.95), st.floats(-1.0, 1.0), st.floats(0.3, 3.0)),
    st.builds(Stable, st.floats(0.3, 0.95), st.floats(-0.9, 0.9), st.floats(0.3, 3.0)),
    st.builds(Cauchy, st.floats(0.3, 3.0)),
    st.builds(SubordinatorMinusDrift, st.floats(0.2, 0.8), st.floats(0.3, 3.0),
              st.floats(0.2, 3.0)),
)


@given(specs, st.floats(-50, 50))
@settings(max_examples=200, deadline=None)
def test_char_exponent_hermitian_and_nonnegative_real_part(spec, xi):
    psi = spec.char_exponent(np.array([xi, -xi]))
    assert psi[0].real >= -1e-12
    assert psi[1] == pytest.approx(np.conj(psi[0]), rel=1e-12, abs=1e-12)


@given(specs)
@settings(max_examples=60, deadline=None)
def test_dict_round_trip(spec):
    assert spec_from_dict(spec.to_dict()) == spec
    assert spec.dual().dual() == spec


def test_brownian_exponent():
    b = Brownian(2.0, 0.5)
    assert b.char_exponent(1.0) == pytest.approx(2.0 - 0.5j)


def test_cauchy_exponent():
    assert Cauchy(1.5).char_exponent(np.array([2.0]))[0] == pytest.approx(3.0)


@pytest.mark.parametrize("call", [
    lambda: Brownian(0.0),
    lambda: Stable(2.5),
    lambda: Stable(1.5, 1.2),
    lambda: Stable(0.5, 1.0),
    lambda: SubordinatorMinusDrift(0.5, 1.0, 0.0),
    lambda: SubordinatorMinusDrift(1.2),
])
def test_constructor_validation(call):
    with pytest.raises(ValueError):
        call()


def test_unknown_kind():
    with pytest.raises(ValueError):
        spec_from_dict({"kind": "poisson"})


def test_rho_values():
    assert spitzer_rho(Brownian()) == 0.5
    assert spitzer_rho(Cauchy()) == 0.5
    assert spitzer_rho(SubordinatorMinusDrift(0.5)) is None
    # spectrally negative 1.5-stable: rho = 1/alpha
    assert zolotarev_rho(1.5, -1.0) == pytest.approx(2.0 / 3.0)


def test_asymmetric_cauchy_rejected():
    with pytest.raises(UnsupportedClassification):
        classify_regularity(Stable(1.0, 0.5))


def test_smd_classification():
    s = SubordinatorMinusDrift(0.5)
    prof = classify_regularity(s)
    assert not prof.upward_regular and prof.downward_regular
    assert prof.d == 0.0 and prof.d_star > 0
    dual = classify_regularity(s.dual())
    assert dual.d == pytest.approx(prof.d_star) and dual.d_star == 0.0
