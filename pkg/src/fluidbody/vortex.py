"""Vortex blobs around the body, the vortical force terms and limit systems.

The vorticity is a finite set of blobs with common core radius ``delta``
and the regularized planar kernel

    K_delta(d) = perp(d) / (2 pi max(|d|^2, delta^2)).

Everything tied to the body is computed in the body frame, where the
boundary systems are fixed; positions and velocities are rotated on the
way in and out.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .coefficients import InertiaModel, a_connection_unbounded, inertia_model
from .dynamics import Trajectory, integrate, kinetic_energy, lab_to_states, state_to_lab
from .errors import GeometryError
from .geometry import BodyShape, SolidState, cross3, perp, rot, rot3
from .laplace2d import INV_2PI, ExteriorSolver, routh_solver


@dataclass(frozen=True)
class VortexCloud:
    positions: np.ndarray  # (k, 2), lab frame
    strengths: np.ndarray  # (k,)
    delta: float = 1e-2
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "positions",
                           np.asarray(self.positions, dtype=float).reshape(-1, 2))
        object.__setattr__(self, "strengths", np.asarray(self.strengths, dtype=float).reshape(-1))
        if len(self.positions) != len(self.strengths):
            raise ValueError("positions and strengths differ in length")
        if not self.delta > 0:
            raise ValueError("blob radius must be positive")

    @property
    def total(self) -> float:
        return float(self.strengths.sum())

    @property
    def beta(self) -> float:
        return self.gamma + self.total

    def __len__(self) -> int:
        return len(self.strengths)

    def moved(self, positions) -> "VortexCloud":
        return replace(self, positions=np.asarray(positions, dtype=float).reshape(-1, 2))

    @classmethod
    def empty(cls, gamma: float = 0.0, delta: float = 1e-2) -> "VortexCloud":
        return cls(np.zeros((0, 2)), np.zeros(0), delta, gamma)

    @classmethod
    def ring(cls, center, radius: float, n: int, total: float, delta: float,
             gamma: float = 0.0) -> "VortexCloud":
        t = 2 * np.pi * np.arange(n) / n
        pos = np.asarray(center, float) + radius * np.column_stack([np.cos(t), np.sin(t)])
        return cls(pos, np.full(n, total / n), delta, gamma)

    @classmethod
    def grid(cls, center, half_width: float, n: int, total: float, delta: float,
             gamma: float = 0.0) -> "VortexCloud":
        s = np.linspace(-half_width, half_width, n)
        X, Y = np.meshgrid(s, s)
        pos = np.asarray(center, float) + np.column_stack([X.ravel(), Y.ravel()])
        return cls(pos, np.full(n * n, total / (n * n)), delta, gamma)


# ---------------------------------------------------------------------------
# free-space kernels


def blob_kernel(d, delta: float) -> np.ndarray:
    r2 = np.maximum((d**2).sum(-1, keepdims=True), delta**2)
    return INV_2PI * perp(d) / r2


def blob_green(r, delta: float) -> np.ndarray:
    """Stream function of K_delta for unit strength, C^1 across r = delta."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    far = r >= delta
    out[far] = INV_2PI * np.log(r[far])
    out[~far] = INV_2PI * (np.log(delta) + 0.5 * (r[~far] ** 2 / delta**2 - 1.0))
    return out


def biot_savart_plane(cloud: VortexCloud, x) -> np.ndarray:
    """K_R2[omega](x) for the blob cloud, x of shape (m, 2) or (2,)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if len(cloud) == 0:
        out = np.zeros_like(x)
    else:
        d = x[:, None, :] - cloud.positions[None, :, :]
        out = np.einsum("mkj,k->mj", blob_kernel(d, cloud.delta), cloud.strengths)
    return out[0] if single else out


def biot_savart_gradient(cloud: VortexCloud, x, step: float = 1e-6) -> np.ndarray:
    """Jacobian d K_R2[omega]_i / d x_j at a point, centred differences."""
    x = np.asarray(x, dtype=float)
    J = np.zeros((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        J[:, j] = (biot_savart_plane(cloud, x + e) - biot_savart_plane(cloud, x - e)) / (2 * step)
    return J


# ---------------------------------------------------------------------------
# fields around the body


class VorticalField:
    """U1, U2 and U for the body at q with circulation gamma and a cloud.

    U2 = K_R2[omega] + grad chi + gamma H, where chi is the decaying
    potential cancelling the normal trace of K_R2[omega] on the body.
    """

    def __init__(self, shape: BodyShape, q, gamma: float, cloud: VortexCloud, p=None):
        self.shape = shape
        self.q = np.asarray(q, dtype=float)
        self.R = rot(self.q[2])
        self.gamma = float(gamma)
        self.cloud = cloud
        self.p = np.zeros(3) if p is None else np.asarray(p, dtype=float)  # body frame
        self.ex = ExteriorSolver.for_shape(shape)
        c = shape.contour
        self.y = self.to_body(cloud.positions)
        inside = c.contains(self.y) if len(cloud) else np.zeros(0, bool)
        if inside.any():
            raise GeometryError(f"vortex blob {cloud.positions[inside][0]} lies inside the body")
        self.body_cloud = cloud.moved(self.y)
        kb = biot_savart_plane(self.body_cloud, c.x)
        self.chi = self.ex.neumann(-np.einsum("ij,ij->i", kb, c.normal))
        self.H = self.ex.harmonic_field()
        self.phi = self.ex.kirchhoff()
        self._kb_boundary = kb

    # -- frames ------------------------------------------------------------

    def to_body(self, x) -> np.ndarray:
        return (np.atleast_2d(x) - self.q[:2]) @ self.R

    def to_lab_vectors(self, v) -> np.ndarray:
        return np.atleast_2d(v) @ self.R.T

    # -- body-frame evaluations -------------------------------------------

    def U2_body(self, y) -> np.ndarray:
        y = np.atleast_2d(y)
        return (biot_savart_plane(self.body_cloud, y) + self.chi.gradient(y, check=False)
                + self.gamma * self.H.gradient(y, check=False))

    def U1_basis_body(self, y) -> np.ndarray:
        """grad Phi_i at y, shape (m, 3, 2)."""
        return self.phi.gradient(np.atleast_2d(y), check=False)

    def U_body(self, y) -> np.ndarray:
        return self.U2_body(y) + np.einsum("mij,i->mj", self.U1_basis_body(y), self.p)

    def U2_boundary(self) -> np.ndarray:
        return (self._kb_boundary + self.chi.boundary_gradient()
                + self.gamma * self.H.boundary_gradient())

    def U(self, x) -> np.ndarray:
        """Full lab-frame velocity at lab points."""
        return self.to_lab_vectors(self.U_body(self.to_body(x)))

    def U2(self, x) -> np.ndarray:
        return self.to_lab_vectors(self.U2_body(self.to_body(x)))

    # -- force terms (body frame) -------------------------------------------

    def force_terms(self):
        """(E, B, D) with F = E + p x B + D; gamma is carried inside U2."""
        c = self.shape.contour
        K = self.phi.flux
        dtau = self.phi.tangential_derivative()
        U2 = self.U2_boundary()
        w = c.ds
        E = -0.5 * ((U2**2).sum(-1) * w) @ K
        B = -(np.einsum("ij,ij->i", U2, c.tau) * w) @ np.cross(K, dtau)
        D = np.zeros(3)
        if len(self.cloud):
            U = self.U_body(self.y)
            G1 = self.U1_basis_body(self.y)
            D = -np.einsum("k,kj,kij->i", self.cloud.strengths, perp(U), G1)
        return E, B, D

    def force(self) -> np.ndarray:
        E, B, D = self.force_terms()
        return E + cross3(self.p, B) + D

    def blob_velocities(self) -> np.ndarray:
        if len(self.cloud) == 0:
            return np.zeros((0, 2))
        return self.to_lab_vectors(self.U_body(self.y))


def vorticity_field_exterior(shape: BodyShape, q, gamma: float, cloud: VortexCloud,
                             p=None) -> VorticalField:
    return VorticalField(shape, q, gamma, cloud, p)


def d_term(shape: BodyShape, q, p, gamma: float, cloud: VortexCloud) -> np.ndarray:
    """D in body components; ``p`` is the body-frame velocity (l, r)."""
    return VorticalField(shape, q, gamma, cloud, p).force_terms()[2]


# ---------------------------------------------------------------------------
# coupled body + cloud dynamics


def _split(y):
    return y[:3], y[3:6], y[6:].reshape(-1, 2)


def vortical_derivative(y, shape: BodyShape, model: InertiaModel, cloud: VortexCloud):
    q, qd, X = _split(y)
    th = q[2]
    R3 = rot3(th)
    p = R3.T @ qd
    fld = VorticalField(shape, q, cloud.gamma, cloud.moved(X), p)
    F = R3 @ fld.force()
    M = model.Mg + model.Ma_theta(th)
    qdd = np.linalg.solve(M, F - a_connection_unbounded(model.Ma, th, qd))
    return np.concatenate([qd, qdd, fld.blob_velocities().ravel()])


def rhs_vortical(state: SolidState, shape: BodyShape, gamma: float, cloud: VortexCloud,
                 model: InertiaModel | None = None) -> np.ndarray:
    """Lab-frame q'' of the body moving with circulation gamma and the cloud."""
    model = model or inertia_model(shape)
    y = np.concatenate([state_to_lab(state), cloud.positions.ravel()])
    return vortical_derivative(y, shape, model, replace(cloud, gamma=gamma))[3:6]


def advance_cloud(cloud: VortexCloud, velocity, dt: float, tol: float = 1e-10) -> VortexCloud:
    """Move blobs along ``velocity(x) -> (k, 2)`` for a time dt."""
    if len(cloud) == 0:
        return cloud

    def f(t, y):
        return np.asarray(velocity(y.reshape(-1, 2)), dtype=float).ravel()

    res = integrate(f, cloud.positions.ravel(), dt, tol, t_eval=np.array([0.0, dt]))
    return cloud.moved(res.y[-1])


def _body_gap(shape, q, X):
    if len(X) == 0:
        return np.inf
    y = (X - q[:2]) @ rot(q[2])
    c = shape.contour
    d = c.min_distance(y)
    d[c.contains(y)] *= -1
    return float(d.min())


def simulate_vortical(shape: BodyShape, state0: SolidState, cloud: VortexCloud, T: float,
                      tol: float = 1e-8, model: InertiaModel | None = None, n_out: int = 101,
                      energies: bool = True, t_eval=None) -> Trajectory:
    """Coupled integration of (q, q', blob positions) in one state vector."""
    model = model or inertia_model(shape)
    y0 = np.concatenate([state_to_lab(state0), cloud.positions.ravel()])

    def f(t, y):
        return vortical_derivative(y, shape, model, cloud)

    def ev(t, y):
        q, _, X = _split(y)
        return _body_gap(shape, q, X) - cloud.delta

    t_eval = np.linspace(0, T, n_out) if t_eval is None else t_eval
    res = integrate(f, y0, T, tol, t_eval, event=ev if len(cloud) else None)
    states = lab_to_states(res.y[:, :6])
    clouds = res.y[:, 6:].reshape(len(res.t), -1, 2)
    E1, E2 = [], []
    if energies:
        for s, X in zip(states, clouds):
            e1, e2 = renormalized_energy(shape, SolidState.from_vector(s), cloud.gamma,
                                         cloud.moved(X), model)
            E1.append(e1)
            E2.append(e2)
    else:
        E1 = E2 = [np.nan] * len(res.t)
    status = "overlap" if res.status == "collision" else res.status
    gaps = np.array([_body_gap(shape, s[:3], X) for s, X in zip(states, clouds)])
    return Trajectory(res.t, states, np.array(E1), gaps, status, res.message,
                      {"nfev": res.nfev, "nsteps": res.nsteps, "energy_form2": np.array(E2)},
                      clouds, cloud.strengths.copy())


# ---------------------------------------------------------------------------
# renormalized energy, two routes


def renormalized_energy(shape: BodyShape, state: SolidState, gamma: float, cloud: VortexCloud,
                        model: InertiaModel | None = None):
    """The conserved energy computed in two independent ways.

    Form 1 uses the Dirichlet Green function of the exterior and the
    Dirichlet stream function Psi_H.  Form 2 uses only Neumann solves:
    the stream function of K[omega] is assembled from harmonic conjugates
    and the vorticity/circulation cross term from its value at infinity.
    Returns ``(form1, form2)``.
    """
    model = model or inertia_model(shape)
    cloud = replace(cloud, gamma=gamma)
    kin = kinetic_energy(model.Mg + model.Ma, state.p)
    if len(cloud) == 0:
        return kin, kin
    ex = ExteriorSolver.for_shape(shape)
    c = shape.contour
    y = (cloud.positions - state.h) @ state.R
    G = cloud.strengths
    beta = cloud.beta
    d = np.sqrt(((y[:, None, :] - y[None, :, :]) ** 2).sum(-1))
    free = blob_green(d, cloud.delta)
    np.fill_diagonal(free, 0.0)

    # route A: G_S(x, y) = G_delta(|x - y|) + w_y(x) - Psi_H(x), the
    # symmetric Green function vanishing on the body and bounded at infinity
    w = ex.green_regular(y).value(y, check=False)  # [k, l] = w_{y_l}(y_k)
    psiH = ex.stream_H().value(y, check=False)
    GS = free + w - psiH[:, None]
    form1 = kin - 0.5 * G @ GS @ G - beta * G @ psiH

    # route B: Psi_K = sum G_delta + theta_omega - Omega Psi_H(B) + c_K
    bc = cloud.moved(y)
    kb = biot_savart_plane(bc, c.x)
    chi = ex.neumann(-np.einsum("ij,ij->i", kb, c.normal))
    th_w = ex.conjugate(chi)
    th_H = ex.conjugate(ex.harmonic_field())
    logc = INV_2PI * 0.5 * np.log((c.x**2).sum(-1))
    kappa = -np.mean(logc + th_H.trace)
    dwall = np.sqrt(((c.x[:, None, :] - y[None, :, :]) ** 2).sum(-1))
    free_wall = blob_green(dwall, cloud.delta) @ G
    Om = cloud.total
    cK = -np.mean(free_wall + th_w.trace)
    psiHB = INV_2PI * 0.5 * np.log((y**2).sum(-1)) + th_H.value(y, check=False) + kappa
    psiK = free @ G + th_w.value(y, check=False) - Om * psiHB + cK
    psiK_inf = cK - Om * kappa
    form2 = kin - 0.5 * G @ psiK + beta * psiK_inf
    return float(form1), float(form2)


# ---------------------------------------------------------------------------
# zero-radius limit systems


def limit_massive(h, hd, gamma: float, cloud: VortexCloud, m: float) -> np.ndarray:
    """h'' from m h'' = gamma (h' - K_R2[omega](h))^perp."""
    u = biot_savart_plane(cloud, np.asarray(h, float))
    return gamma / m * perp(np.asarray(hd, float) - u)


def limit_massless(h, gamma: float, cloud: VortexCloud) -> np.ndarray:
    """h' = K_R2[omega](h)."""
    return biot_savart_plane(cloud, np.asarray(h, float))


def limit_cloud_velocity(cloud: VortexCloud, h, gamma: float) -> np.ndarray:
    """Blob velocities under K_R2[omega + gamma delta_h], no self-induction."""
    if len(cloud) == 0:
        return np.zeros((0, 2))
    u = biot_savart_plane(cloud, cloud.positions)
    return u + gamma * blob_kernel(cloud.positions - np.asarray(h, float), cloud.delta)


def advance_limit_vorticity(cloud: VortexCloud, h, gamma: float, dt: float,
                            tol: float = 1e-10) -> VortexCloud:
    """Transport the cloud for a time dt around a point vortex frozen at h."""
    return advance_cloud(cloud, lambda X: limit_cloud_velocity(cloud.moved(X), h, gamma), dt, tol)


def simulate_limit(mode: str, h0, gamma: float, cloud: VortexCloud, T: float,
                   tol: float = 1e-10, m: float = 1.0, hd0=None, t_eval=None):
    """Point particle coupled to the cloud; returns (t, h, h', blob positions)."""
    h0 = np.asarray(h0, dtype=float)
    k = len(cloud)

    def f(t, y):
        X = y[4:].reshape(-1, 2)
        cl = cloud.moved(X)
        h, hd = y[:2], y[2:4]
        if mode == "massive":
            hdd = limit_massive(h, hd, gamma, cl, m)
        else:
            hdd = np.zeros(2)
            hd = limit_massless(h, gamma, cl)
        return np.concatenate([hd, hdd, limit_cloud_velocity(cl, h, gamma).ravel()])

    if mode not in ("massive", "massless"):
        raise ValueError(mode)
    hd0 = np.zeros(2) if hd0 is None else np.asarray(hd0, float)
    y0 = np.concatenate([h0, hd0, cloud.positions.ravel()])
    t_eval = np.linspace(0, T, 101) if t_eval is None else t_eval
    res = integrate(f, y0, T, tol, t_eval)
    X = res.y[:, 4:].reshape(len(res.t), k, 2)
    if mode == "massless":
        H = res.y[:, :2]
        Hd = np.array([limit_massless(h, gamma, cloud.moved(x)) for h, x in zip(H, X)])
    else:
        H, Hd = res.y[:, :2], res.y[:, 2:4]
    return res.t, H, Hd, X


def two_vortex_solution(h0, x0, gamma: float, strength: float, t) -> tuple:
    """Closed-form pair of point vortices (gamma at h, strength at x)."""
    h0, x0 = np.asarray(h0, float), np.asarray(x0, float)
    tot = gamma + strength
    cen = (gamma * h0 + strength * x0) / tot
    dd = np.sum((x0 - h0) ** 2)
    w = tot / (2 * np.pi * dd)
    t = np.asarray(t, dtype=float)
    c, s = np.cos(w * t), np.sin(w * t)

    def turn(v):
        return np.column_stack([c * v[0] - s * v[1], s * v[0] + c * v[1]])

    return cen + turn(h0 - cen), cen + turn(x0 - cen), w


# ---------------------------------------------------------------------------
# point vortex in a bounded cavity


def bounded_point_vortex(omega, h, hd, gamma: float, mode: str, m: float = 1.0) -> np.ndarray:
    """massive: h'' = gamma/m (h' - gamma u_Omega(h))^perp; massless: h' = gamma u_Omega(h)."""
    u = routh_solver(omega).velocity(np.asarray(h, float))
    if mode == "massive":
        return gamma / m * perp(np.asarray(hd, float) - gamma * u)
    if mode == "massless":
        return gamma * u
    raise ValueError(mode)


def simulate_bounded_limit(omega, h0, gamma: float, mode: str, T: float, tol: float = 1e-10,
                           m: float = 1.0, hd0=None, t_eval=None):
    """Returns (t, h, h', energy) with the matching conserved quantity.

    massive: 1/2 m |h'|^2 - gamma^2 psi_Omega(h); massless: psi_Omega(h).
    """
    rs = routh_solver(omega)
    h0 = np.asarray(h0, dtype=float)
    t_eval = np.linspace(0, T, 101) if t_eval is None else t_eval

    def ev(t, y):
        return float(omega.min_distance(y[None, :2])[0]) - 2 * rs.h_fd

    if mode == "massive":
        hd0 = gamma * rs.velocity(h0) if hd0 is None else np.asarray(hd0, float)

        def f(t, y):
            hdd = bounded_point_vortex(omega, y[:2], y[2:], gamma, mode, m)
            return np.concatenate([y[2:], hdd])

        res = integrate(f, np.concatenate([h0, hd0]), T, tol, t_eval, event=ev)
        H, Hd = res.y[:, :2], res.y[:, 2:]
        En = np.array([0.5 * m * v @ v - gamma**2 * rs.psi(x) for x, v in zip(H, Hd)])
    else:
        def f(t, y):
            return bounded_point_vortex(omega, y, None, gamma, mode)

        res = integrate(f, h0, T, tol, t_eval, event=ev)
        H = res.y
        Hd = np.array([gamma * rs.velocity(x) for x in H])
        En = np.array([rs.psi(x) for x in H])
    return res.t, H, Hd, En
