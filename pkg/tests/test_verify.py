import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fluidbody.geometry import build_cavity, build_shape, perp
from fluidbody.laplace2d import ExteriorSolver
from fluidbody.verify import (FD_FLOOR, REFINE_FLOOR, IdentityReport, check_blasius,
                              check_E_half_DC, check_flux_circulation, check_force_decomposition,
                              check_lamb, check_lemzphi, check_magnetic_identity, check_skew,
                              check_stokes, fluid_quadrature, make_report, reports_to_json,
                              run_suite, skew_part_matrix)

DISC = {"shape": "disc", "radius": 1.0}
ELLIPSE = {"shape": "ellipse", "semi_axes": [2.0, 1.0]}


@pytest.fixture(scope="module")
def ellipse():
    return build_shape(ELLIPSE, 128)


def test_make_report_relative_error():
    r = make_report("x", [3.0, 4.0], [3.0, 4.5], 10, 0.2)
    assert r.abs_err == pytest.approx(0.5)
    assert r.rel_err == pytest.approx(0.5 / np.hypot(3.0, 4.5))
    assert r.passed and r.N == 10 and r.floor == REFINE_FLOOR


def test_make_report_uses_scale_for_vanishing_sides():
    r = make_report("x", 1e-9, 0.0, 4, 1e-6, scale=10.0)
    assert r.rel_err == pytest.approx(1e-10)
    assert make_report("x", 1e-9, 0.0, 4, 1e-6).rel_err == pytest.approx(1.0)


def test_report_complex_sides_flatten():
    r = make_report("z", 1 + 2j, 1 + 2j, 4, 1e-8)
    assert r.lhs == [1.0, 2.0] and r.rel_err == 0.0


def test_flux_circulation_rigid_field(ellipse):
    c = ellipse.contour
    assert check_flux_circulation(c, np.tile([1.0, 0.0], (c.n, 1))).passed
    assert check_flux_circulation(c, perp(c.x)).passed


def test_blasius_and_lamb_on_harmonic_field(ellipse):
    c = ellipse.contour
    H = ExteriorSolver.for_shape(ellipse).H_boundary()[:, None] * c.tau
    assert all(r.passed for r in check_blasius(c, H, H))
    assert all(check_lamb(c, H, H, i).passed for i in range(3))


def test_blasius_rejects_normal_field(ellipse):
    c = ellipse.contour
    with pytest.raises(ValueError, match="tangent"):
        check_blasius(c, c.normal, c.tau)


@pytest.mark.parametrize("desc", [DISC, ELLIPSE,
                                  {"shape": "fourier", "radius": 1.0, "cos": [0.0, 0.1, 0.15],
                                   "sin": [0.05, 0.0, 0.1]}])
def test_stokes_and_lemzphi(desc):
    s = build_shape(desc, 128, center=(0.1, -0.05)) if desc["shape"] == "fourier" \
        else build_shape(desc, 128)
    assert all(r.passed for r in check_stokes(s))
    assert all(r.passed for r in check_lemzphi(s))


def test_force_decomposition_ellipse(ellipse):
    assert all(r.passed for r in check_force_decomposition(ellipse, (0.7, -0.4), 1.3, 2.0))


@settings(max_examples=30, deadline=None)
@given(arrays(float, (3, 3, 3), elements=st.floats(-5, 5)),
       arrays(float, 3, elements=st.floats(-5, 5)))
def test_skew_holds_for_any_symmetric_family(D, p):
    dM = 0.5 * (D + np.swapaxes(D, 1, 2))
    X = skew_part_matrix(dM, p)
    assert np.abs(X + X.T).max() <= 1e-12 * (1 + np.abs(dM).max() * np.abs(p).max())
    assert check_skew(dM, p).passed


def test_skew_detects_asymmetric_family():
    dM = np.zeros((3, 3, 3))
    dM[0, 0, 1] = 1.0
    assert not check_skew(dM, [1.0, 0.0, 0.0]).passed


def test_atten_on_concentric_disc():
    om = build_cavity(DISC, 128)
    r = check_E_half_DC(om, build_shape({"shape": "disc", "radius": 0.25}, 128), [0.3, 0.0, 0.0])
    assert r.passed and r.floor == FD_FLOOR


@pytest.fixture(scope="module")
def small_bounded():
    return build_cavity(DISC, 64), build_shape({"shape": "disc", "radius": 0.25}, 64)


def test_fluid_quadrature_area(small_bounded):
    om, sh = small_bounded
    _, w = fluid_quadrature(om, sh, [0.3, 0.1, 0.0])
    assert w.sum() == pytest.approx(np.pi * (1 - 0.25**2), rel=1e-3)


def test_magnetic_identity_at_rest(small_bounded):
    om, sh = small_bounded
    r = check_magnetic_identity(om, sh, [0.3, 0.0, 0.0], (0.0, 0.0, 0.0), (0.2, 1.0, 0.5), 2.0,
                                n_phi=32, n_rho=8)
    assert r.lhs == [0.0] and r.rhs == [0.0]


def test_magnetic_identity_without_circulation(small_bounded):
    om, sh = small_bounded
    r = check_magnetic_identity(om, sh, [0.3, 0.0, 0.0], (0.4, -0.3, 0.0), (0.2, 1.0, 0.5), 0.0,
                                n_phi=32, n_rho=8)
    assert r.abs_err == 0.0


def test_magnetic_identity_holds(small_bounded):
    om, sh = small_bounded
    r = check_magnetic_identity(om, sh, [0.3, 0.0, 0.0], (0.4, -0.3, 0.0), (0.2, 1.0, 0.5),
                                2 * np.pi, n_phi=48, n_rho=12)
    assert r.passed


def test_suite_json_and_tol_override():
    reports = run_suite(64, refine=False, magnetic=False, tol=1e-30)
    assert all(isinstance(r, IdentityReport) for r in reports)
    assert all(r.tol == 1e-30 for r in reports)
    assert all(r.passed == (r.rel_err < 1e-30) for r in reports)
    rows = json.loads(reports_to_json(reports))
    assert len(rows) == len(reports)
    assert set(rows[0]) >= {"name", "lhs", "rhs", "abs_err", "rel_err", "N", "passed", "tol"}
    assert len({r["name"] for r in rows}) == len(rows)


def test_suite_refinement_recorded():
    reports = run_suite(64, refine=True, magnetic=False)
    assert all(r.rel_err_refined is not None for r in reports)
    for r in reports:
        if r.passed:
            assert r.rel_err < r.tol and r.rel_err_refined <= max(r.rel_err, r.floor)
