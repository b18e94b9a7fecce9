"""Equations of motion of the solid and their time integration.

State vectors are lab-frame ``y = (h1, h2, theta, h1', h2', theta')``
unless stated otherwise.  Recorded trajectories store the velocity in
the body frame, ``l = R(theta)^T h'`` and ``r = theta'``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from .coefficients import (InertiaModel, a_connection_unbounded, christoffel_contract,
                           dMa_bounded, genuine_inertia, gyroscopic_body, _added_mass_from,
                           _lorentz_from)
from .errors import ClearanceError, CollisionError, GeometryError, SolverError
from .geometry import BodyShape, Contour, SolidState, cross3, place, rot
from .laplace2d import ConfinedSolver, clearance as _clearance

CSV_HEADER = ["t", "h1", "h2", "theta", "l1", "l2", "r", "energy", "clearance"]


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 6): h1, h2, theta, l1, l2, r
    energy: np.ndarray
    clearance: np.ndarray
    status: str = "ok"
    message: str = ""
    stats: dict = field(default_factory=dict)
    cloud: np.ndarray | None = None  # (n, k, 2) blob positions
    strengths: np.ndarray | None = None

    @property
    def h(self) -> np.ndarray:
        return self.states[:, :2]

    @property
    def theta(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def hdot(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        l1, l2 = self.states[:, 3], self.states[:, 4]
        return np.column_stack([c * l1 - s * l2, s * l1 + c * l2])

    @property
    def r(self) -> np.ndarray:
        return self.states[:, 5]

    def energy_drift(self) -> float:
        e = self.energy
        scale = max(abs(e[0]), 1e-300)
        return float(np.max(np.abs(e - e[0])) / scale)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for row in np.column_stack([self.times, self.states, self.energy, self.clearance]):
                w.writerow([repr(float(v)) for v in row])

    def cloud_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "id", "x1", "x2", "strength"])
            if self.cloud is None:
                return
            for t, pos in zip(self.times, self.cloud):
                for k, (x, s) in enumerate(zip(pos, self.strengths)):
                    w.writerow([repr(float(t)), k, repr(float(x[0])), repr(float(x[1])),
                                repr(float(s))])

    @classmethod
    def read_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != CSV_HEADER:
            raise ValueError(f"unexpected header {rows[0]}")
        a = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, 9)
        return cls(a[:, 0], a[:, 1:7], a[:, 7], a[:, 8])


def lab_to_states(Y) -> np.ndarray:
    """Rows (q, q') to rows (q, l, r) with l = R(theta)^T h'."""
    Y = np.atleast_2d(Y)
    th = Y[:, 2]
    c, s = np.cos(th), np.sin(th)
    l1 = c * Y[:, 3] + s * Y[:, 4]
    l2 = -s * Y[:, 3] + c * Y[:, 4]
    return np.column_stack([Y[:, :3], l1, l2, Y[:, 5]])


def state_to_lab(state: SolidState) -> np.ndarray:
    return np.concatenate([state.q, state.R @ state.l, [state.r]])


# ---------------------------------------------------------------------------
# integration


@dataclass
class IntegrationResult:
    t: np.ndarray
    y: np.ndarray
    status: str
    message: str
    t_event: float | None
    nfev: int
    nsteps: int


def integrate(rhs: Callable, y0, T: float, tol: float, t_eval=None,
              event: Callable | None = None, max_step: float = np.inf) -> IntegrationResult:
    """Adaptive Runge-Kutta 5(4) (Dormand-Prince) with rtol = atol = tol.

    ``event(t, y)`` is a stop function: the run halts at its first sign
    change from positive to non-positive (located on the dense output).
    A ``ClearanceError`` raised by ``rhs`` inside a step also halts the
    run; everything accepted so far is returned in both cases.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if T < 0:
        raise ValueError("T must be non-negative")
    y0 = np.asarray(y0, dtype=float)
    t_eval = np.linspace(0.0, T, 101) if t_eval is None else np.asarray(t_eval, dtype=float)
    out_t, out_y = [], []
    if T == 0:
        return IntegrationResult(np.array([0.0]), y0[None], "ok", "", None, 0, 0)
    solver = RK45(rhs, 0.0, y0, T, rtol=tol, atol=tol, max_step=max_step)
    k = 0
    if t_eval[0] == 0.0:
        out_t.append(0.0)
        out_y.append(y0.copy())
        k = 1
    status, message, t_event, nsteps = "ok", "", None, 0
    g_old = event(0.0, y0) if event else None
    if event and g_old <= 0:
        return IntegrationResult(np.array(out_t), np.array(out_y), "collision",
                                 "initial state violates the stop condition", 0.0, 0, 0)
    while solver.status == "running":
        try:
            msg = solver.step()
        except ClearanceError as exc:
            status, message, t_event = "collision", str(exc), solver.t
            break
        nsteps += 1
        if solver.status == "failed":
            raise SolverError(f"integrator failed at t={solver.t:.6g}: {msg}")
        dense = solver.dense_output()
        t_hi = solver.t
        if event:
            g_new = event(t_hi, solver.y)
            if g_new <= 0:
                t_event = brentq(lambda s: event(s, dense(s)), solver.t_old, t_hi, xtol=1e-14)
                t_hi = t_event
                status, message = "collision", f"stop condition reached at t={t_event:.6g}"
        while k < len(t_eval) and t_eval[k] <= t_hi:
            out_t.append(t_eval[k])
            out_y.append(dense(t_eval[k]))
            k += 1
        if status != "ok":
            if not out_t or out_t[-1] < t_hi:
                out_t.append(t_hi)
                out_y.append(dense(t_hi))
            break
    return IntegrationResult(np.array(out_t), np.array(out_y), status, message, t_event,
                             solver.nfev, nsteps)


# ---------------------------------------------------------------------------
# unbounded fluid


def rhs_unbounded(state: SolidState, model: InertiaModel, gamma: float) -> np.ndarray:
    """q'' = (Mg + Ma_theta)^{-1} (gamma q' x B_theta - <Gamma_a, q', q'>)."""
    qd = np.concatenate([state.R @ state.l, [state.r]])
    return _qddot_unbounded(state.theta, qd, model, gamma)


def _qddot_unbounded(theta, qd, model: InertiaModel, gamma):
    M = model.Mg + model.Ma_theta(theta)
    f = gamma * cross3(qd, model.B_theta(theta)) - a_connection_unbounded(model.Ma, theta, qd)
    return np.linalg.solve(M, f)


def lorentz_force_lab(qd, xi, theta, gamma):
    """gamma (perp(h') - theta' R xi, R xi . h'), equal to gamma q' x B_theta."""
    qd = np.asarray(qd, dtype=float)
    Rx = rot(theta) @ np.asarray(xi, float)
    return gamma * np.array([-qd[1] - qd[2] * Rx[0], qd[0] - qd[2] * Rx[1], Rx @ qd[:2]])


def rhs_body_frame(p, model: InertiaModel, gamma: float) -> np.ndarray:
    """p' from (Mg + Ma) p' = gamma p x B - <Gamma_g + Gamma_a, p, p>."""
    p = np.asarray(p, dtype=float)
    f = gamma * cross3(p, model.B) - gyroscopic_body(model, p)
    return np.linalg.solve(model.Mg + model.Ma, f)


def kinetic_energy(M, v) -> float:
    v = np.asarray(v, dtype=float)
    return 0.5 * float(v @ M @ v)


def energy_unbounded(model: InertiaModel, state: SolidState) -> float:
    return kinetic_energy(model.Mg + model.Ma, state.p)


def simulate_unbounded(model: InertiaModel, state0: SolidState, gamma: float, T: float,
                       tol: float = 1e-8, frame: str = "lab", n_out: int = 101,
                       t_eval=None) -> Trajectory:
    t_eval = np.linspace(0, T, n_out) if t_eval is None else t_eval
    if frame == "lab":
        def f(t, y):
            return np.concatenate([y[3:], _qddot_unbounded(y[2], y[3:], model, gamma)])

        res = integrate(f, state_to_lab(state0), T, tol, t_eval)
        states = lab_to_states(res.y)
    elif frame == "body":
        def f(t, y):
            c, s = math.cos(y[2]), math.sin(y[2])
            hd = (c * y[3] - s * y[4], s * y[3] + c * y[4])
            return np.concatenate([hd, [y[5]], rhs_body_frame(y[3:], model, gamma)])

        res = integrate(f, state0.to_vector(), T, tol, t_eval)
        states = res.y
    else:
        raise ValueError(f"unknown frame {frame!r}")
    M = model.Mg + model.Ma
    E = np.array([kinetic_energy(M, s[3:]) for s in states])
    return Trajectory(res.t, states, E, np.full(len(res.t), np.inf), res.status, res.message,
                      {"nfev": res.nfev, "nsteps": res.nsteps, "frame": frame})


# ---------------------------------------------------------------------------
# bounded fluid


def collision_distance(omega: Contour, shape: BodyShape, q) -> float:
    """Minimum node-to-node distance between S(q) and the cavity wall."""
    return _clearance(omega, place(shape, q))


def stop_distance(shape: BodyShape, omega: Contour | None = None) -> float:
    """Halt threshold: 1e-2 diam(S), raised to half the coarser panel spacing."""
    d = 1e-2 * shape.diameter
    if omega is not None:
        d = max(d, 0.5 * max(shape.contour.spacing, omega.spacing))
    return d


def rhs_bounded(state: SolidState, omega: Contour, shape: BodyShape, gamma: float) -> np.ndarray:
    """q'' from (Mg + Ma(q)) q'' + <Gamma_a(q), q', q'> = gamma^2 E + gamma q' x B."""
    y = state_to_lab(state)
    return _qddot_bounded(y, omega, shape, gamma)


def _qddot_bounded(y, omega, shape, gamma):
    q, qd = y[:3], y[3:]
    s = ConfinedSolver(omega, shape, q)
    Ma = _added_mass_from(s)
    f = np.zeros(3)
    if gamma != 0.0:
        E, B = _lorentz_from(s)
        f += gamma**2 * E + gamma * cross3(qd, B)
    if np.any(qd):
        f -= christoffel_contract(dMa_bounded(omega, shape, q), qd)
    return np.linalg.solve(genuine_inertia(shape) + Ma, f)


def energy_bounded(omega: Contour, shape: BodyShape, q, qd, gamma: float) -> float:
    """1/2 (Mg + Ma(q)) q'.q' - 1/2 gamma^2 C(q)."""
    s = ConfinedSolver(omega, shape, q)
    M = genuine_inertia(shape) + _added_mass_from(s)
    return kinetic_energy(M, qd) - 0.5 * gamma**2 * s.capacity


def simulate_bounded(omega: Contour, shape: BodyShape, state0: SolidState, gamma: float,
                     T: float, tol: float = 1e-8, n_out: int = 101, t_eval=None) -> Trajectory:
    """Integrate until T or the first approach closer than ``stop_distance``."""
    delta = stop_distance(shape, omega)
    gap0 = collision_distance(omega, shape, state0.q)
    if gap0 <= delta:
        raise ClearanceError(f"initial clearance {gap0:.4g} is below the stop distance {delta:.4g}")

    def f(t, y):
        return np.concatenate([y[3:], _qddot_bounded(y, omega, shape, gamma)])

    def ev(t, y):
        try:
            return collision_distance(omega, shape, y[:3]) - delta
        except GeometryError:
            return -1.0

    t_eval = np.linspace(0, T, n_out) if t_eval is None else t_eval
    res = integrate(f, state_to_lab(state0), T, tol, t_eval, event=ev)
    states = lab_to_states(res.y)
    E, gap = [], []
    for y in res.y:
        try:
            E.append(energy_bounded(omega, shape, y[:3], y[3:], gamma))
        except ClearanceError:
            E.append(np.nan)
        gap.append(collision_distance(omega, shape, y[:3]))
    return Trajectory(res.t, states, np.array(E), np.array(gap), res.status, res.message,
                      {"nfev": res.nfev, "nsteps": res.nsteps})


def raise_on_collision(traj: Trajectory) -> Trajectory:
    if traj.status == "collision":
        raise CollisionError(traj.message, traj)
    return traj


# ---------------------------------------------------------------------------
# regime dispatch


def energy(regime: str, *args, **kwargs) -> float:
    """Conserved quantity of a regime.

    ``energy('unbounded', model, state)``,
    ``energy('bounded', omega, shape, state, gamma)``,
    ``energy('vortical', shape, state, gamma, cloud)`` (first form).
    """
    if regime == "unbounded":
        return energy_unbounded(*args, **kwargs)
    if regime == "bounded":
        omega, shape, state, gamma = args
        return energy_bounded(omega, shape, state.q, state_to_lab(state)[3:], gamma)
    if regime == "vortical":
        from .vortex import renormalized_energy

        return renormalized_energy(*args, **kwargs)[0]
    raise ValueError(f"unknown regime {regime!r}")


def rhs_vortical(state: SolidState, shape: BodyShape, gamma: float, cloud, model=None):
    from .vortex import rhs_vortical as _rv

    return _rv(state, shape, gamma, cloud, model)
