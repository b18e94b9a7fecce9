import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidbody.errors import GeometryError
from fluidbody.geometry import (SolidState, build_cavity, build_shape, geometric_moments, place,
                                rot)

import oracles


def test_disc_area():
    s = build_shape({"shape": "disc", "radius": 1.0}, 64)
    assert s.area == pytest.approx(math.pi, rel=1e-3)


def test_ellipse_area():
    s = build_shape({"shape": "ellipse", "semi_axes": [2.0, 1.0]}, 128)
    assert s.area == pytest.approx(2 * math.pi, rel=1e-3)


def test_trefoil_area_against_quadrature():
    s = build_shape({"shape": "fourier", "radius": 1.0, "cos": [0.0, 0.0, 0.2]}, 256)
    assert s.area == pytest.approx(oracles.AREA_TREFOIL, rel=1e-6)


def test_disc_moments():
    s = build_shape({"shape": "disc"}, 64)
    area, xg = geometric_moments(s)
    assert area == pytest.approx(math.pi, rel=1e-10)
    assert np.allclose(xg, 0.0, atol=1e-12)
    c = s.contour
    assert np.sum(c.x[:, 0] * c.normal[:, 0] * c.ds) == pytest.approx(-math.pi, abs=1e-6)


def test_asymmetric_centroid_against_quadrature():
    s = build_shape({"shape": "fourier", "radius": 1.0, "cos": [0.0, 0.1, 0.15],
                     "sin": [0.05, 0.0, 0.1]}, 256, center=(0.0, 0.0))
    area, xg = geometric_moments(s)
    assert area == pytest.approx(oracles.AREA_BUNDLED, rel=1e-10)
    assert np.allclose(xg, oracles.CENTROID_BUNDLED, atol=1e-6)


def test_centroid_is_frame_origin():
    s = build_shape({"shape": "fourier", "radius": 1.0, "cos": [0.0, 0.1, 0.15]}, 128)
    _, xg = geometric_moments(s)
    assert np.allclose(xg, 0.0, atol=1e-10)


def test_identity_placement():
    s = build_shape({"shape": "ellipse", "semi_axes": [2.0, 1.0]}, 64)
    c = place(s, [0.0, 0.0, 0.0])
    assert np.allclose(c.x, s.contour.x, atol=1e-15)


def test_quarter_turn_swaps_ellipse_box():
    s = build_shape({"shape": "ellipse", "semi_axes": [2.0, 1.0]}, 128)
    x = place(s, [0.0, 0.0, math.pi / 2]).x
    assert np.ptp(x[:, 0]) == pytest.approx(2.0, abs=1e-3)
    assert np.ptp(x[:, 1]) == pytest.approx(4.0, abs=1e-3)


def test_placement_is_isometry():
    s = build_shape({"shape": "fourier", "radius": 1.0, "cos": [0.0, 0.1], "sin": [0.1]}, 64)
    q = np.array([1.0, 2.0, math.pi / 3])
    x = place(s, q).x
    assert np.abs(x - (s.contour.x @ rot(q[2]).T + q[:2])).max() < 1e-14


def test_normals_point_into_body():
    s = build_shape({"shape": "disc", "radius": 2.0}, 32)
    c = s.contour
    assert np.all(np.einsum("ij,ij->i", c.normal, c.x) < 0)


def test_cavity_normals_point_outward():
    om = build_cavity({"shape": "disc", "radius": 1.0}, 32)
    assert np.all(np.einsum("ij,ij->i", om.normal, om.x) > 0)


def test_rejects_bad_descriptors():
    with pytest.raises(GeometryError):
        build_shape({"shape": "disc", "radius": -1.0}, 32)
    with pytest.raises(GeometryError):
        build_shape({"shape": "square"}, 32)
    with pytest.raises(GeometryError):
        build_shape({"shape": "fourier", "radius": 1.0, "cos": [1.5]}, 32)
    with pytest.raises(GeometryError):
        build_shape({"shape": "disc"}, 8)


def test_state_round_trip():
    s = SolidState([1.0, 2.0], 0.3, [0.1, -0.2], 0.5)
    t = SolidState.from_vector(s.to_vector())
    assert np.array_equal(t.to_vector(), s.to_vector())
    y = np.array([[0.3, -0.7]])
    assert np.allclose(s.body_point(s.map_point(y)), y, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(-math.pi, math.pi),
       st.floats(-5, 5), st.floats(-5, 5))
def test_area_invariant_under_rigid_motion(a, b, theta, h1, h2):
    s = build_shape({"shape": "ellipse", "semi_axes": [a, b]}, 64)
    c = place(s, [h1, h2, theta])
    area = -0.5 * np.sum(np.einsum("ij,ij->i", c.x, c.normal) * c.ds)
    assert area == pytest.approx(math.pi * a * b, rel=1e-8)
