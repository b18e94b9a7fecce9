import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidbody.errors import GeometryError
from fluidbody.geometry import build_cavity, build_shape, perp
from fluidbody.vortex import (VortexCloud, VorticalField, advance_cloud, biot_savart_plane,
                              blob_green, d_term, simulate_bounded_limit, simulate_limit,
                              two_vortex_solution)

DISC = {"shape": "disc", "radius": 1.0}


@pytest.fixture(scope="module")
def disc():
    return build_shape(DISC, 128)


def point_velocity(x, sources):
    """Velocity of unregularized point vortices [(position, strength), ...]."""
    u = np.zeros(2)
    for z, g in sources:
        d = np.asarray(x, float) - np.asarray(z, float)
        u += g * perp(d) / (2 * np.pi * d @ d)
    return u


def test_unit_vortex_velocity():
    cl = VortexCloud([[1.0, 0.0]], [1.0], 0.01)
    assert np.allclose(biot_savart_plane(cl, [0.0, 0.0]), [0.0, -1 / (2 * np.pi)], atol=1e-15)
    assert np.allclose(biot_savart_plane(cl, [2.0, 0.0]), [0.0, 1 / (2 * np.pi)], atol=1e-15)


def test_blob_centre_is_still():
    cl = VortexCloud([[0.3, -0.2]], [2.0], 0.05)
    assert np.array_equal(biot_savart_plane(cl, [0.3, -0.2]), np.zeros(2))


def test_symmetric_pair_cancels_on_midline():
    cl = VortexCloud([[-1.0, 0.0], [1.0, 0.0]], [1.0, 1.0], 0.01)
    assert np.allclose(biot_savart_plane(cl, [0.0, 0.0]), 0.0, atol=1e-15)


def test_blob_green_is_continuous():
    d = 0.05
    lo, hi = blob_green(np.array([d * (1 - 1e-9), d * (1 + 1e-9)]), d)
    assert abs(lo - hi) < 1e-9


def test_without_cloud_U2_is_circulation_field(disc):
    fld = VorticalField(disc, [0.0, 0.0, 0.0], 1.0, VortexCloud.empty())
    x = np.array([[2.0, 0.0], [0.0, 3.0]])
    expect = np.array([perp(p) / (2 * np.pi * p @ p) for p in x])
    assert np.allclose(fld.U2(x), expect, atol=1e-8)


def test_circle_theorem_images(disc):
    G = 1.0
    fld = VorticalField(disc, [0.0, 0.0, 0.0], 0.0, VortexCloud([[2.0, 0.0]], [G], 1e-3))
    for x in ([0.0, 2.0], [-1.5, 0.5], [1.2, -1.0]):
        ref = point_velocity(x, [([2.0, 0.0], G), ([0.5, 0.0], -G), ([0.0, 0.0], G)])
        assert np.allclose(fld.U2(np.array([x]))[0], ref, atol=1e-6)


def test_circle_theorem_moved_body(disc):
    # same configuration translated and turned: images move with the body
    h = np.array([0.4, -0.3])
    fld = VorticalField(disc, [*h, 0.7], 0.0, VortexCloud([h + [2.0, 0.0]], [1.0], 1e-3))
    x = h + np.array([0.0, 2.0])
    ref = point_velocity(x, [(h + [2.0, 0.0], 1.0), (h + [0.5, 0.0], -1.0), (h, 1.0)])
    assert np.allclose(fld.U2(np.array([x]))[0], ref, atol=1e-6)


@settings(max_examples=10, deadline=None)
@given(st.floats(1.5, 4.0), st.floats(-math.pi, math.pi), st.floats(-2, 2), st.floats(-2, 2))
def test_U2_is_tangent_on_body(r, phi, G, gamma):
    sh = build_shape({"shape": "ellipse", "semi_axes": [1.0, 0.6]}, 128)
    cl = VortexCloud([[r * math.cos(phi), r * math.sin(phi)]], [G], 0.05)
    fld = VorticalField(sh, [0.0, 0.0, 0.0], gamma, cl)
    un = np.einsum("ij,ij->i", fld.U2_boundary(), sh.contour.normal)
    assert np.abs(un).max() < 1e-6 * (1 + abs(G) + abs(gamma))


def test_advance_cloud_zero_field():
    cl = VortexCloud([[0.1, 0.2], [1.0, -1.0]], [1.0, 2.0], 0.05)
    out = advance_cloud(cl, lambda X: np.zeros_like(X), 3.0)
    assert np.array_equal(out.positions, cl.positions)


def test_advance_cloud_rigid_rotation():
    cl = VortexCloud([[1.0, 0.0], [0.0, 2.0]], [1.0, 1.0], 0.05)
    out = advance_cloud(cl, lambda X: perp(X), math.pi / 2, tol=1e-12)
    assert np.allclose(out.positions, [[0.0, 1.0], [-2.0, 0.0]], atol=1e-9)


def test_vortex_pair_period():
    G, d = 1.0, 1.0
    cl = VortexCloud([[-0.5 * d, 0.0], [0.5 * d, 0.0]], [G, G], 0.01)
    w = G / (math.pi * d * d)
    out = advance_cloud(cl, lambda X: biot_savart_plane(cl.moved(X), X), 2 * math.pi / w,
                        tol=1e-12)
    assert np.allclose(out.positions, cl.positions, atol=1e-8)


def test_d_term_vanishes_without_vorticity(disc):
    D = d_term(disc, [0.0, 0.0, 0.0], [0.3, -0.2, 0.5], 1.0, VortexCloud.empty())
    assert np.array_equal(D, np.zeros(3))


def test_d_term_decays_with_distance(disc):
    p = [0.4, 0.2, 0.3]
    size = [np.linalg.norm(d_term(disc, [0, 0, 0], p, 0.5, VortexCloud([[r, 0.3]], [1.0], 0.05)))
            for r in (2.0, 4.0, 8.0)]
    assert size[0] > size[1] > size[2] > 0


def test_d_term_blob_splitting(disc):
    # four quarter-strength blobs at the corners of the core act like the whole blob
    p = [0.4, 0.2, 0.3]
    x, delta = np.array([2.0, 0.5]), 0.05
    one = d_term(disc, [0, 0, 0], p, 0.5, VortexCloud([x], [1.0], delta))
    corners = 0.5 * delta * np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    four = d_term(disc, [0, 0, 0], p, 0.5, VortexCloud(x + corners, [0.25] * 4, delta))
    assert np.abs(one - four).max() < 1e-2 * np.abs(one).max()


def test_blob_inside_body_rejected(disc):
    with pytest.raises(GeometryError):
        VorticalField(disc, [0.0, 0.0, 0.0], 0.0, VortexCloud([[0.2, 0.0]], [1.0]))


def test_massive_limit_circle_radius():
    gamma, m = 2.0, 1.5
    l0 = np.array([0.6, 0.8])
    t, H, Hd, _ = simulate_limit("massive", [0.0, 0.0], gamma, VortexCloud.empty(), 10.0,
                                 1e-11, m, hd0=l0)
    cen = m / gamma * perp(l0)
    rad = np.linalg.norm(H - cen, axis=1)
    assert np.abs(rad - m * np.linalg.norm(l0) / abs(gamma)).max() < 1e-8
    assert np.abs(np.linalg.norm(Hd, axis=1) - 1.0).max() < 1e-8


def test_massless_limit_without_cloud_is_still():
    t, H, Hd, _ = simulate_limit("massless", [0.3, 0.1], 1.0, VortexCloud.empty(), 2.0)
    assert np.array_equal(Hd, np.zeros_like(Hd))
    assert np.all(H == [0.3, 0.1])


def test_massless_limit_two_vortices():
    gamma, G = 1.0, 2.0
    x0 = np.array([1.0, 0.0])
    cl = VortexCloud([x0], [G], 1e-3)
    t = np.linspace(0, 3.0, 31)
    _, H, Hd, X = simulate_limit("massless", [0.0, 0.0], gamma, cl, 3.0, 1e-12, t_eval=t)
    h, x, w = two_vortex_solution([0.0, 0.0], x0, gamma, G, t)
    assert w == pytest.approx((gamma + G) / (2 * np.pi), rel=1e-14)
    assert np.abs(H - h).max() < 1e-8
    assert np.abs(X[:, 0] - x).max() < 1e-8


def test_bounded_point_vortex_orbit():
    om = build_cavity(DISC, 128)
    T = 1.5 * math.pi
    t, H, Hd, En = simulate_bounded_limit(om, [0.5, 0.0], 2 * math.pi, "massless", T, 1e-12)
    assert np.abs(np.linalg.norm(H, axis=1) - 0.5).max() < 1e-6
    assert np.allclose(H[-1], [0.5, 0.0], atol=1e-4)
    assert np.abs(En - En[0]).max() < 1e-8


def test_bounded_massive_energy():
    om = build_cavity(DISC, 128)
    t, H, Hd, En = simulate_bounded_limit(om, [0.4, 0.1], 2 * math.pi, "massive", 10.0, 1e-11,
                                          m=0.2)
    assert len(t) == 101
    assert np.abs(En - En[0]).max() < 1e-6


def test_bounded_massive_wall_hit_halts():
    # heavy particle kicked off the drift reaches the wall before T
    om = build_cavity(DISC, 128)
    t, H, _, _ = simulate_bounded_limit(om, [0.4, 0.1], 2 * math.pi, "massive", 10.0, 1e-10,
                                        hd0=[0.1, 0.0])
    assert t[-1] < 10.0
    assert np.all(np.linalg.norm(H, axis=1) < 1.0)
