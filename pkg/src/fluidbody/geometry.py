"""Body shapes, their boundary discretization and rigid placement.

Conventions used throughout the package:

* ``perp(x) = (-x2, x1)``.
* Boundary curves are counterclockwise, ``tau`` is the unit tangent and
  ``n = perp(tau)`` points out of the fluid, i.e. into the body.
* The body frame is centred at the centre of mass.

A boundary is sampled at ``N`` equispaced parameter values of a smooth
periodic parametrization.  Each sample carries the trapezoidal weight
``ds = |x'(t)| 2 pi / N``, which is spectrally accurate for smooth closed
curves.  The samples are called nodes (or panels, in the CLI flags).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GeometryError

TWO_PI = 2.0 * np.pi


def perp(v):
    """Rotate vectors by +pi/2 along the last axis."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def rot(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rot3(theta: float) -> np.ndarray:
    """Block rotation diag(R(theta), 1) acting on (l, r) vectors."""
    out = np.eye(3)
    out[:2, :2] = rot(theta)
    return out


def cross3(a, b):
    """Plane cross product of (l, r) vectors.

    Equal to the usual cross product of R^3, written as
    ``(r_a perp(l_b) - r_b perp(l_a), perp(l_a) . l_b)``.
    """
    return np.cross(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


# ---------------------------------------------------------------------------
# curves


ParamFn = Callable[[np.ndarray], tuple]


class Curve:
    """Smooth closed curve ``x(t) = A x0(t) + b`` with ``t`` in [0, 2 pi)."""

    def __init__(self, fn: ParamFn, A=None, b=None, reverse: bool = False):
        self._fn = fn
        self.A = np.eye(2) if A is None else np.asarray(A, dtype=float)
        self.b = np.zeros(2) if b is None else np.asarray(b, dtype=float)
        self.reverse = reverse

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.reverse:
            x, dx, ddx = self._fn(-t)
            dx = -dx
        else:
            x, dx, ddx = self._fn(t)
        A = self.A
        return x @ A.T + self.b, dx @ A.T, ddx @ A.T

    def transformed(self, A=None, b=None) -> "Curve":
        """Compose with ``y -> A y + b``."""
        A = np.eye(2) if A is None else np.asarray(A, dtype=float)
        b = np.zeros(2) if b is None else np.asarray(b, dtype=float)
        return Curve(self._fn, A @ self.A, A @ self.b + b, self.reverse)

    def reversed(self) -> "Curve":
        return Curve(self._fn, self.A, self.b, not self.reverse)


def _disc_fn(a):
    def fn(t):
        c, s = np.cos(t), np.sin(t)
        x = a * np.stack([c, s], -1)
        return x, a * np.stack([-s, c], -1), -x

    return fn


def _ellipse_fn(a, b):
    def fn(t):
        c, s = np.cos(t), np.sin(t)
        return (np.stack([a * c, b * s], -1), np.stack([-a * s, b * c], -1),
                np.stack([-a * c, -b * s], -1))

    return fn


def _polar_fn(r0, cos_coeffs, sin_coeffs):
    cc = np.asarray(cos_coeffs, dtype=float)
    sc = np.asarray(sin_coeffs, dtype=float)
    kc = np.arange(1, cc.size + 1)
    ks = np.arange(1, sc.size + 1)

    def radius(t):
        t = np.asarray(t)[..., None]
        r = r0 + (cc * np.cos(kc * t)).sum(-1) + (sc * np.sin(ks * t)).sum(-1)
        dr = (-cc * kc * np.sin(kc * t)).sum(-1) + (sc * ks * np.cos(ks * t)).sum(-1)
        ddr = (-cc * kc**2 * np.cos(kc * t)).sum(-1) - (sc * ks**2 * np.sin(ks * t)).sum(-1)
        return r, dr, ddr

    def fn(t):
        r, dr, ddr = radius(t)
        c, s = np.cos(t), np.sin(t)
        e = np.stack([c, s], -1)
        f = np.stack([-s, c], -1)
        x = r[..., None] * e
        dx = dr[..., None] * e + r[..., None] * f
        ddx = (ddr - r)[..., None] * e + 2 * dr[..., None] * f
        return x, dx, ddx

    return fn, radius


# ---------------------------------------------------------------------------
# discretized boundaries


class Contour:
    """Boundary nodes of one closed curve.

    ``side='body'``: the fluid lies outside the curve, ``normal`` = perp(tau).
    ``side='cavity'``: the fluid lies inside, ``normal`` = -perp(tau).
    In both cases ``normal`` points out of the fluid.
    """

    def __init__(self, curve: Curve, n: int, side: str = "body"):
        if side not in ("body", "cavity"):
            raise ValueError(side)
        self.curve = curve
        self.n = int(n)
        self.side = side
        self.t = TWO_PI * np.arange(self.n) / self.n
        self.x, self.dx, self.ddx = curve(self.t)
        self.speed = np.hypot(self.dx[:, 0], self.dx[:, 1])
        self.tau = self.dx / self.speed[:, None]
        sign = 1.0 if side == "body" else -1.0
        self.normal = sign * perp(self.tau)
        self.ds = self.speed * (TWO_PI / self.n)

    @property
    def spacing(self) -> float:
        return float(self.ds.max())

    @property
    def perimeter(self) -> float:
        return float(self.ds.sum())

    def refined(self, k: int) -> "Contour":
        return Contour(self.curve, self.n * k, self.side)

    def diameter(self) -> float:
        d = self.x[:, None, :] - self.x[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def min_distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        d = pts[:, None, :] - self.x[None, :, :]
        return np.sqrt((d**2).sum(-1)).min(axis=1)

    def contains(self, pts) -> np.ndarray:
        """Winding-number test, True for points enclosed by the curve."""
        pts = np.atleast_2d(pts)
        d = self.x[None, :, :] - pts[:, None, :]
        ang = np.arctan2(d[..., 1], d[..., 0])
        dang = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
        dang = (dang + np.pi) % TWO_PI - np.pi
        return np.abs(dang.sum(axis=1)) > np.pi


def _signed_area(x, dx, dt):
    return 0.5 * np.sum(x[:, 0] * dx[:, 1] - x[:, 1] * dx[:, 0]) * dt


def _segments_cross(p):
    """True if the closed polygon ``p`` has two non-adjacent crossing edges."""
    a = p
    b = np.roll(p, -1, axis=0)
    m = len(p)

    def orient(u, v, w):
        return np.sign((v[..., 0] - u[..., 0]) * (w[..., 1] - u[..., 1])
                       - (v[..., 1] - u[..., 1]) * (w[..., 0] - u[..., 0]))

    A1, B1 = a[:, None], b[:, None]
    A2, B2 = a[None, :], b[None, :]
    hit = ((orient(A1, B1, A2) * orient(A1, B1, B2) < 0)
           & (orient(A2, B2, A1) * orient(A2, B2, B1) < 0))
    i, j = np.indices((m, m))
    near = (np.abs(i - j) <= 1) | (np.abs(i - j) == m - 1)
    return bool((hit & ~near).any())


# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True, eq=False)
class BodyShape:
    """A rigid body boundary in its own frame (origin = centre of mass)."""

    curve: Curve
    contour: Contour
    area: float
    centroid_geom: np.ndarray
    mass: float
    inertia_moment: float
    descriptor: dict = field(default_factory=dict)

    # node-level views, named after the panel vocabulary of the CLI
    @property
    def n_panels(self) -> int:
        return self.contour.n

    @property
    def midpoints(self) -> np.ndarray:
        return self.contour.x

    @property
    def tangents(self) -> np.ndarray:
        return self.contour.tau

    @property
    def normals(self) -> np.ndarray:
        return self.contour.normal

    @property
    def ds(self) -> np.ndarray:
        return self.contour.ds

    @property
    def perimeter(self) -> float:
        return self.contour.perimeter

    @property
    def diameter(self) -> float:
        return self.contour.diameter()

    @property
    def K(self) -> np.ndarray:
        """Neumann data (n1, n2, perp(x).n) of the three Kirchhoff potentials."""
        x, n = self.contour.x, self.contour.normal
        return np.column_stack([n[:, 0], n[:, 1], np.einsum("ij,ij->i", perp(x), n)])

    def with_panels(self, n_panels: int) -> "BodyShape":
        return BodyShape(self.curve, Contour(self.curve, n_panels), self.area,
                         self.centroid_geom, self.mass, self.inertia_moment, self.descriptor)

    def scaled(self, eps: float, mass: float | None = None,
               inertia: float | None = None) -> "BodyShape":
        """The homothetic body eps*S, discretized with the same nodes."""
        curve = self.curve.transformed(eps * np.eye(2))
        return BodyShape(curve, Contour(curve, self.n_panels), eps**2 * self.area,
                         eps * self.centroid_geom,
                         self.mass if mass is None else mass,
                         self.inertia_moment if inertia is None else inertia,
                         dict(self.descriptor, eps=eps))


def curve_from_descriptor(descriptor: dict) -> Curve:
    """Raw (uncentred) curve for a shape descriptor, see ``build_shape``."""
    kind = descriptor.get("shape")
    if kind == "disc":
        a = float(descriptor.get("radius", 1.0))
        if a <= 0:
            raise GeometryError("disc radius must be positive")
        fn = _disc_fn(a)
    elif kind == "ellipse":
        a, b = map(float, descriptor.get("semi_axes", (1.0, 1.0)))
        if a <= 0 or b <= 0:
            raise GeometryError("ellipse semi-axes must be positive")
        fn = _ellipse_fn(a, b)
    elif kind == "fourier":
        r0 = float(descriptor.get("radius", 1.0))
        fn, radius = _polar_fn(r0, descriptor.get("cos", []), descriptor.get("sin", []))
        rr = radius(np.linspace(0, TWO_PI, 4096, endpoint=False))[0]
        if rr.min() <= 0:
            raise GeometryError(
                f"self-intersecting polar curve: r(phi) reaches {rr.min():.3g} <= 0")
    else:
        raise GeometryError(f"unknown shape kind {kind!r}")
    curve = Curve(fn)
    if "angle" in descriptor:
        curve = curve.transformed(rot(float(descriptor["angle"])))
    return curve


def build_shape(descriptor: dict, n_panels: int, mass: float = 1.0,
                inertia: float | None = None, center: Sequence[float] | None = None) -> BodyShape:
    """Build a body from a descriptor.

    ``descriptor`` is one of ``{"shape": "disc", "radius": a}``,
    ``{"shape": "ellipse", "semi_axes": [a, b]}`` or
    ``{"shape": "fourier", "radius": r0, "cos": [...], "sin": [...]}``
    (polar curve r(phi) = r0 + sum_k cos_k cos(k phi) + sin_k sin(k phi)).
    An optional ``"angle"`` rotates the curve.

    The frame origin is the centroid of the enclosed region (uniform
    density) unless ``center`` gives the centre of mass explicitly, in which
    case ``centroid_geom`` is reported relative to it.  ``inertia`` defaults
    to the uniform-density polar moment about the origin.
    """
    if n_panels < 16:
        raise GeometryError(f"need at least 16 panels, got {n_panels}")
    return shape_from_curve(curve_from_descriptor(descriptor), n_panels, mass, inertia,
                            center, dict(descriptor))


def shape_from_curve(curve: Curve, n_panels: int, mass: float = 1.0,
                     inertia: float | None = None, center=None,
                     descriptor: dict | None = None) -> BodyShape:
    """Centre, orient and discretize an arbitrary smooth parametrized curve."""
    m = 2048
    dt = TWO_PI / m
    t = np.arange(m) * dt
    x, dx, _ = curve(t)
    if _segments_cross(x[:: max(1, m // 512)]):
        raise GeometryError("boundary curve is self-intersecting")
    if _signed_area(x, dx, dt) < 0:
        curve = curve.reversed()
        x, dx, _ = curve(t)
    area = _signed_area(x, dx, dt)
    cx = 0.5 * np.sum(x[:, 0] ** 2 * dx[:, 1]) * dt / area
    cy = -0.5 * np.sum(x[:, 1] ** 2 * dx[:, 0]) * dt / area
    c = np.array([cx, cy])
    origin = c if center is None else np.asarray(center, dtype=float)
    curve = curve.transformed(b=-origin)
    x, dx, _ = curve(t)
    polar = (np.sum(x[:, 0] ** 3 * dx[:, 1]) - np.sum(x[:, 1] ** 3 * dx[:, 0])) * dt / 3.0
    J = mass * polar / area if inertia is None else float(inertia)
    return BodyShape(curve, Contour(curve, n_panels), float(area), c - origin,
                     float(mass), float(J), descriptor or {})


def build_cavity(descriptor: dict, n_panels: int) -> Contour:
    """Boundary of the bounded container Omega, in lab coordinates.

    Accepts the ``build_shape`` descriptors plus an optional ``"center"``;
    no recentring is applied.
    """
    if n_panels < 16:
        raise GeometryError(f"need at least 16 panels, got {n_panels}")
    curve = curve_from_descriptor(descriptor)
    t = np.linspace(0, TWO_PI, 1024, endpoint=False)
    x, dx, _ = curve(t)
    if _signed_area(x, dx, t[1]) < 0:
        curve = curve.reversed()
    curve = curve.transformed(b=np.asarray(descriptor.get("center", (0.0, 0.0)), dtype=float))
    contour = Contour(curve, n_panels, side="cavity")
    contour.descriptor = dict(descriptor)
    return contour


def geometric_moments(shape: BodyShape, check: bool = True):
    """Area and geometric centre from boundary integrals.

    Uses ``|S| = -1/2 oint x.n ds`` and the Green formulas for the first
    moments.  With ``check`` the Stokes identities for oint x_j n_i and
    oint x_j perp(x).n are verified at 1e-6 relative.
    """
    c = shape.contour
    x, n, ds = c.x, c.normal, c.ds
    area = -0.5 * np.sum(np.einsum("ij,ij->i", x, n) * ds)
    xg = np.array([0.5 * np.sum(x[:, 0] ** 2 * c.tau[:, 1] * ds),
                   -0.5 * np.sum(x[:, 1] ** 2 * c.tau[:, 0] * ds)]) / area
    if check:
        xn = np.einsum("ki,kj,k->ij", x, n, ds)  # [j, i] = oint x_j n_i
        tor = np.einsum("ij,ij->i", perp(x), n)
        lhs = np.array([xn[0, 0], xn[1, 1], xn[0, 1], xn[1, 0],
                        np.sum(x[:, 0] * tor * ds), np.sum(x[:, 1] * tor * ds)])
        rhs = np.array([-area, -area, 0.0, 0.0, area * xg[1], -area * xg[0]])
        if np.abs(lhs - rhs).max() > 1e-6 * max(area, 1.0):
            raise GeometryError("Stokes identities violated; discretization too coarse")
    return float(area), xg


@dataclass
class SolidState:
    """Configuration q = (h, theta) and velocity p = (l, r)."""

    h: np.ndarray
    theta: float
    l: np.ndarray
    r: float

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float).reshape(2)
        self.l = np.asarray(self.l, dtype=float).reshape(2)
        self.theta = float(self.theta)
        self.r = float(self.r)

    @property
    def q(self) -> np.ndarray:
        return np.array([self.h[0], self.h[1], self.theta])

    @property
    def p(self) -> np.ndarray:
        return np.array([self.l[0], self.l[1], self.r])

    @property
    def R(self) -> np.ndarray:
        return rot(self.theta)

    @property
    def R3(self) -> np.ndarray:
        return rot3(self.theta)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, y) -> "SolidState":
        y = np.asarray(y, dtype=float)
        return cls(y[:2], y[2], y[3:5], y[5])

    def map_point(self, x) -> np.ndarray:
        """Body-frame point(s) to the lab frame, x -> h + R(theta) x."""
        return np.asarray(x) @ self.R.T + self.h

    def body_point(self, y) -> np.ndarray:
        return (np.asarray(y) - self.h) @ self.R


def place(shape: BodyShape, q, n_panels: int | None = None) -> Contour:
    """Lab-frame boundary of S(q) = {h + R(theta) x}."""
    q = np.asarray(q, dtype=float)
    curve = shape.curve.transformed(rot(q[2]), q[:2])
    return Contour(curve, n_panels or shape.n_panels, side="body")
