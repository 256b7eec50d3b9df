import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma

from viscous_heating.gauss_moments import (EXP_WEIGHT, R2_WEIGHT, UNIT_WEIGHT, QuadratureError,
                                           QuadratureSpec, bracket, format_reports, reports_csv,
                                           tensor_fields, verify_appendix)


def radial_moment(k):
    # E|v|^{2k} for a standard 3D Gaussian: |v|^2 is chi-square with 3 dof
    return 2.0**k * gamma(k + 1.5) / gamma(1.5)


def test_radial_oracle_itself():
    # Isserlis: E v_i^4 = 3, E v_i^2 v_j^2 = 1, so E|v|^4 = 3*3 + 6*1
    assert radial_moment(2) == pytest.approx(15.0, rel=1e-15)
    assert radial_moment(3) == pytest.approx(105.0, rel=1e-15)


@pytest.mark.parametrize("phi,expected", [
    (1.0, 1.0),
    ({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1}, 3.0),
    (lambda v: np.sum(v**2, axis=1) ** 2, 15.0),
    (lambda v: np.sum(v**2, axis=1) ** 3, 105.0),
])
def test_bracket_scalar_moments(phi, expected):
    assert bracket(phi) == pytest.approx(expected, abs=1e-12)


def test_bracket_odd_moments_vanish():
    assert abs(bracket({(1, 0, 0): 1.0})) < 1e-14
    assert abs(bracket({(3, 1, 0): 1.0})) < 1e-13


def test_bracket_tensor_valued():
    second = bracket(lambda v: np.einsum("ni,nj->nij", v, v))
    assert np.allclose(second, np.eye(3), atol=1e-13)


def test_bracket_rejects_nonfinite():
    with pytest.raises(QuadratureError):
        with np.errstate(invalid="ignore"):
            bracket(lambda v: np.log(v[:, 0]))


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(2)
    with pytest.raises(ValueError):
        QuadratureSpec(8, "simpson")


def test_tensor_fields_zero_and_unit():
    A, B, C = tensor_fields(np.zeros(3))
    assert np.all(A == 0) and np.all(B == 0)
    A, _, _ = tensor_fields(np.array([1.0, 0.0, 0.0]))
    assert np.allclose(A, np.diag([2 / 3, -1 / 3, -1 / 3]), atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=3, max_size=3))
def test_tensor_fields_trace_free_and_symmetric(v):
    A, B, C = tensor_fields(np.array(v))
    assert abs(np.trace(A)) <= 1e-12 * (1 + np.dot(v, v))
    assert np.allclose(A, A.T)
    for p in itertools.permutations(range(3)):
        assert np.allclose(C, C.transpose(p))


def test_unit_weights_give_nu_one_kappa_five_halves():
    reports = verify_appendix()
    assert len(reports) == 10
    assert all(r.passed for r in reports), format_reports(reports)
    assert reports[0].nu_value == pytest.approx(radial_moment(2) / 15, abs=1e-12)
    # κ = <B·B>/3 with <B·B> = (E|v|^6 - 10 E|v|^4 + 25 E|v|^2)/4 = 15/2
    bb = (radial_moment(3) - 10 * radial_moment(2) + 25 * radial_moment(1)) / 4
    assert reports[0].kappa_value == pytest.approx(bb / 3, abs=1e-12)
    assert reports[0].kappa_value == pytest.approx(2.5, abs=1e-12)


def test_r2_weight_gives_nu_seven():
    reports = verify_appendix(R2_WEIGHT, UNIT_WEIGHT)
    assert all(r.passed for r in reports), format_reports(reports)
    assert reports[0].nu_value == pytest.approx(radial_moment(3) / 15, abs=1e-10)


def test_exp_weight_within_generic_tolerance():
    reports = verify_appendix(EXP_WEIGHT, EXP_WEIGHT)
    assert all(r.passed for r in reports), format_reports(reports)
    assert all(r.tolerance == 1e-6 for r in reports)


def test_bc_coefficient_one_half():
    rep = [r for r in verify_appendix() if r.identity_name.startswith("<B_i C_jkl>")]
    assert len(rep) == 1 and rep[0].max_abs_error < 1e-10


def test_coarse_quadrature_is_reported_not_hidden():
    # 4 nodes per axis are exact to degree 7 per axis; r^2 weights push past that
    reports = verify_appendix(R2_WEIGHT, R2_WEIGHT, quad=QuadratureSpec(4), tol=1e-10)
    assert not all(r.passed for r in reports)


def test_reports_csv_header():
    text = reports_csv(verify_appendix())
    lines = text.strip().splitlines()
    assert lines[0] == "identity,max_abs_error,tolerance,passed"
    assert len(lines) == 11
