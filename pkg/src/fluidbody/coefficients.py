"""Coefficients of the solid's equation of motion.

Unbounded fluid (body frame, constant): added mass ``Ma``, conformal
centre ``xi`` and the Kutta-Joukowski vector ``B = (perp(xi), -1)``.
Bounded fluid (lab frame, depending on q): ``Ma(q)``, the capacity
``C(q)`` and the Lorentz-type fields ``E(q)``, ``B(q)``.

Three-vectors ``(l, r)`` carry a planar vector and a scalar; their cross
product is the cross product of R^3, see ``geometry.cross3``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import BodyShape, Contour, cross3, rot, rot3
from .laplace2d import ConfinedSolver, ExteriorSolver, INV_2PI

J3 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


@dataclass(frozen=True)
class InertiaModel:
    """Inertia data of the body, with optional eps-scaling applied.

    ``Mg``, ``Ma`` and ``xi`` are the *effective* (already scaled) values;
    ``eps`` and ``alpha`` record how they were obtained from the ``eps=1``
    body.
    """

    Mg: np.ndarray
    Ma: np.ndarray
    xi: np.ndarray
    eps: float = 1.0
    alpha: float = 0.0

    @property
    def mass(self) -> float:
        return float(self.Mg[0, 0])

    @property
    def I_eps(self) -> np.ndarray:
        return np.diag([1.0, 1.0, self.eps])

    @property
    def B(self) -> np.ndarray:
        """Body-frame Kutta-Joukowski vector (perp(xi), -1)."""
        return np.array([-self.xi[1], self.xi[0], -1.0])

    def Ma_theta(self, theta: float) -> np.ndarray:
        R = rot3(theta)
        return R @ self.Ma @ R.T

    def B_theta(self, theta: float) -> np.ndarray:
        return kutta_joukowski_vector(self.xi, theta)

    def scaled(self, eps: float, alpha: float) -> "InertiaModel":
        """Model of the body eps*S0 with m -> eps^alpha m, J -> eps^(alpha+2) J."""
        if not 0.0 < eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {eps}")
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        Mg, Ma = scaled_inertia(self.Mg, self.Ma, eps, alpha)
        return replace(self, Mg=Mg, Ma=Ma, xi=eps * np.asarray(self.xi), eps=eps, alpha=alpha)


def genuine_inertia(shape: BodyShape) -> np.ndarray:
    return np.diag([shape.mass, shape.mass, shape.inertia_moment])


def scaled_inertia(Mg, Ma, eps: float, alpha: float):
    """(eps^alpha I Mg I, eps^2 I Ma I) with I = diag(1, 1, eps).

    Both commute with the rotation block, so the scaled ``Ma`` may be
    rotated afterwards.
    """
    I = np.diag([1.0, 1.0, eps])
    return eps**alpha * I @ Mg @ I, eps**2 * I @ Ma @ I


# ---------------------------------------------------------------------------
# unbounded fluid


def added_mass_unbounded(shape: BodyShape) -> np.ndarray:
    """m_ij = oint Phi_i dPhi_j/dn ds on the body boundary (body frame)."""
    K = ExteriorSolver.for_shape(shape).kirchhoff()
    return K.trace.T @ (K.flux * shape.ds[:, None])


def conformal_center(shape: BodyShape, radius: float | None = None):
    """Conformal centre by the real and the complex formula.

    Real: xi = oint (H.tau) x ds on the body.  Complex: xi1 + i xi2 =
    oint z H^ dz, which is holomorphic in the fluid, so it is evaluated on
    a circle of ``radius`` (default: one diameter) instead of the body
    boundary.  Returns ``(xi_real, xi_complex)``.
    """
    ex = ExteriorSolver.for_shape(shape)
    c = shape.contour
    xi_real = (ex.H_boundary() * c.ds) @ c.x
    R = radius or 1.5 * float(np.sqrt((c.x**2).sum(-1)).max())
    m = 256
    t = 2 * np.pi * np.arange(m) / m
    z = R * np.exp(1j * t)
    pts = np.column_stack([z.real, z.imag])
    Hv = ex.harmonic_field().gradient(pts)
    Hhat = Hv[:, 0] - 1j * Hv[:, 1]
    val = np.sum(z * Hhat * 1j * z) * (2 * np.pi / m)
    return xi_real, np.array([val.real, val.imag])


def kutta_joukowski_vector(xi, theta: float) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return rot3(theta) @ np.array([-xi[1], xi[0], -1.0])


def inertia_model(shape: BodyShape) -> InertiaModel:
    xi, _ = conformal_center(shape)
    return InertiaModel(genuine_inertia(shape), added_mass_unbounded(shape), xi)


def christoffel_contract(dM, p) -> np.ndarray:
    """<Gamma, p, p>_k = sum_ij 1/2 (dM_i[k,j] + dM_j[k,i] - dM_k[i,j]) p_i p_j.

    ``dM[k]`` is the derivative of the inertia matrix along q_k.
    """
    dM = np.asarray(dM, dtype=float)
    p = np.asarray(p, dtype=float)
    Dp = np.einsum("kij,k->ij", dM, p)  # sum_k p_k dM_k
    quad = np.einsum("kij,i,j->k", dM, p, p)
    return Dp @ p - 0.5 * quad


def a_connection_unbounded(Ma, theta: float, p) -> np.ndarray:
    """Lab-frame <Gamma_{a,theta}, p, p> for Ma_theta = R Ma R^T.

    Closed form -(P, 0) x p - r Ma_theta (perp(l), 0) with P the planar
    part of Ma_theta p.
    """
    p = np.asarray(p, dtype=float)
    M = rot3(theta) @ np.asarray(Ma) @ rot3(theta).T
    P = M @ p
    lp = np.array([-p[1], p[0], 0.0])
    return -cross3(np.array([P[0], P[1], 0.0]), p) - p[2] * (M @ lp)


def dMa_dtheta(Ma, theta: float) -> np.ndarray:
    """d/dtheta of R Ma R^T = J M - M J."""
    M = rot3(theta) @ np.asarray(Ma) @ rot3(theta).T
    return J3 @ M - M @ J3


def gyroscopic_body(model: InertiaModel, p) -> np.ndarray:
    """<Gamma_g, p, p> + <Gamma_a, p, p> in the body frame."""
    p = np.asarray(p, dtype=float)
    l, r = p[:2], p[2]
    m = model.Mg[0, 0]
    Pa = (model.Ma @ p)[:2]
    g = np.array([-m * r * l[1], m * r * l[0], 0.0])
    a = np.array([-r * Pa[1], r * Pa[0], -l[1] * Pa[0] + l[0] * Pa[1]])
    return g + a


# ---------------------------------------------------------------------------
# bounded fluid


@dataclass
class BoundedCoefficients:
    q: np.ndarray
    Ma: np.ndarray
    C: float
    E: np.ndarray
    B: np.ndarray
    clearance: float

    def to_dict(self) -> dict:
        return {"q": self.q.tolist(), "Ma": self.Ma.tolist(), "E": self.E.tolist(),
                "B": self.B.tolist(), "C": float(self.C)}


def _added_mass_from(solver: ConfinedSolver) -> np.ndarray:
    K = solver.kirchhoff()
    nb = solver.nb
    return K.trace[:nb].T @ (K.flux[:nb] * solver.body.ds[:, None])


def added_mass_bounded(omega: Contour, shape: BodyShape, q) -> np.ndarray:
    return _added_mass_from(ConfinedSolver(omega, shape, q))


def _lorentz_from(solver: ConfinedSolver):
    nb = solver.nb
    K = solver.kirchhoff()
    sig = solver.stream().flux[:nb]
    g = K.flux[:nb]
    dtau = K.tangential_derivative()[:nb]
    w = solver.body.ds
    E = -0.5 * (sig**2 * w) @ g
    B = (sig * w) @ np.cross(g, dtau)
    return E, B


def lorentz_fields(omega: Contour, shape: BodyShape, q):
    """(E(q), B(q)) from the unit-flux stream function and the potentials."""
    return _lorentz_from(ConfinedSolver(omega, shape, q))


def fd_step(omega: Contour) -> float:
    return 1e-4 * omega.diameter()


def _is_round(shape: BodyShape) -> bool:
    d = shape.descriptor or {}
    return d.get("shape") == "disc" and not np.any(shape.centroid_geom)


def dMa_bounded(omega: Contour, shape: BodyShape, q, h_fd: float | None = None) -> np.ndarray:
    """Centred differences of Ma(q) along h1, h2, theta, shape (3, 3, 3).

    For a disc centred at its centre of mass the theta derivative is zero
    exactly, so those two solves are skipped.
    """
    q = np.asarray(q, dtype=float)
    h = fd_step(omega) if h_fd is None else h_fd
    out = np.zeros((3, 3, 3))
    for k in range(3):
        if k == 2 and _is_round(shape):
            continue
        e = np.zeros(3)
        e[k] = h
        Mp = added_mass_bounded(omega, shape, q + e)
        Mm = added_mass_bounded(omega, shape, q - e)
        out[k] = (Mp - Mm) / (2 * e[k])
    return out


def a_connection_bounded(omega: Contour, shape: BodyShape, q, p, h_fd: float | None = None):
    return christoffel_contract(dMa_bounded(omega, shape, q, h_fd), p)


def capacity_gradient(omega: Contour, shape: BodyShape, q, h_fd: float | None = None):
    """Centred-difference gradient of C(q)."""
    q = np.asarray(q, dtype=float)
    h = fd_step(omega) if h_fd is None else h_fd
    g = np.zeros(3)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        cp = ConfinedSolver(omega, shape, q + e).capacity
        cm = ConfinedSolver(omega, shape, q - e).capacity
        g[k] = (cp - cm) / (2 * e[k])
    return g


def bounded_coefficients(omega: Contour, shape: BodyShape, q) -> BoundedCoefficients:
    s = ConfinedSolver(omega, shape, q)
    E, B = _lorentz_from(s)
    return BoundedCoefficients(np.asarray(q, float), _added_mass_from(s), s.capacity, E, B, s.gap)


def leading_order_E(u_omega, xi, theta: float) -> np.ndarray:
    """E0(q) = -(perp(u), u . R(theta) xi)."""
    u = np.asarray(u_omega, dtype=float)
    return -np.array([-u[1], u[0], u @ (rot(theta) @ np.asarray(xi, float))])


def annulus_capacity(a: float, R: float) -> float:
    """C for a disc of radius a centred in a disc of radius R."""
    return INV_2PI * np.log(a / R)
