"""Zero-radius experiments: families of shrinking bodies and their limits.

A family shares the initial data ``(h0, theta0, l0, r0, gamma)`` across
eps and shrinks the body to ``eps * S0`` with mass ``eps^alpha m`` and
moment ``eps^(alpha + 2) J``.  The angular velocity starts at
``r0 / eps`` so that ``eps theta'`` is the eps-independent quantity.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coefficients import (InertiaModel, conformal_center, inertia_model, leading_order_E,
                           lorentz_fields)
from .dynamics import Trajectory, simulate_bounded, simulate_unbounded
from .errors import FluidBodyError
from .geometry import BodyShape, Contour, SolidState, rot
from .laplace2d import routh_solver
from .vortex import (VortexCloud, biot_savart_gradient, biot_savart_plane, simulate_bounded_limit,
                     simulate_limit, simulate_vortical, two_vortex_solution)

REGIMES = ("unbounded", "bounded", "vortical")


def thread_count() -> int:
    """Worker cap from FLUIDBODY_THREADS (default: min(4, cpu count))."""
    raw = os.environ.get("FLUIDBODY_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"FLUIDBODY_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError("FLUIDBODY_THREADS must be at least 1")
    return n


@dataclass
class EpsilonFamily:
    base_shape: BodyShape
    epsilons: tuple
    alpha: float
    gamma: float
    l0: tuple = (0.0, 0.0)
    r0: float = 0.0
    h0: tuple = (0.0, 0.0)
    theta0: float = 0.0
    regime: str = "unbounded"
    omega: Contour | None = None
    cloud: VortexCloud | None = None
    drift_start: bool = False  # start from h'(0) = l0 + drift(h0)

    def __post_init__(self):
        eps = [float(e) for e in self.epsilons]
        if not eps or any(not 0.0 < e <= 1.0 for e in eps):
            raise ValueError("epsilons must lie in (0, 1]")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        self.epsilons = tuple(eps)
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.regime == "bounded" and self.omega is None:
            raise ValueError("bounded family needs a cavity")
        if self.alpha > 0 and self.gamma == 0:
            raise ValueError("a massless family needs a nonzero circulation")

    def member_shape(self, eps: float) -> BodyShape:
        s = self.base_shape
        return s.scaled(eps, mass=eps**self.alpha * s.mass,
                        inertia=eps ** (self.alpha + 2) * s.inertia_moment)

    def drift(self, h) -> np.ndarray:
        """Local drift of the limit particle: gamma u_Omega or K_R2[omega]."""
        if self.regime == "bounded":
            return self.gamma * routh_solver(self.omega).velocity(np.asarray(h, float))
        if self.regime == "vortical" and self.cloud is not None and len(self.cloud):
            return biot_savart_plane(self.cloud, np.asarray(h, float))
        return np.zeros(2)

    def initial_state(self, eps: float) -> SolidState:
        hd = np.asarray(self.l0, float)
        if self.drift_start:
            hd = hd + self.drift(self.h0)
        l = rot(self.theta0).T @ hd
        return SolidState(np.asarray(self.h0, float), self.theta0, l, self.r0 / eps)


@dataclass
class FamilyRun:
    family: EpsilonFamily
    trajectories: dict  # eps -> Trajectory or None
    errors: dict = field(default_factory=dict)  # eps -> message


def _run_member(fam: EpsilonFamily, eps: float, T: float, tol: float, n_out: int,
                model: InertiaModel | None) -> Trajectory:
    state = fam.initial_state(eps)
    if fam.regime == "unbounded":
        return simulate_unbounded(model.scaled(eps, fam.alpha), state, fam.gamma, T, tol,
                                  n_out=n_out)
    shape = fam.member_shape(eps)
    if fam.regime == "bounded":
        return simulate_bounded(fam.omega, shape, state, fam.gamma, T, tol, n_out=n_out)
    cloud = fam.cloud if fam.cloud is not None else VortexCloud.empty()
    cloud = VortexCloud(cloud.positions, cloud.strengths, cloud.delta, fam.gamma)
    return simulate_vortical(shape, state, cloud, T, tol, inertia_model(shape), n_out=n_out,
                             energies=False)


def run_family(family: EpsilonFamily, T: float, tol: float = 1e-9, n_out: int = 201,
               threads: int | None = None) -> FamilyRun:
    """One trajectory per eps; failures are recorded and the family goes on.

    Unbounded members use the scaling law applied to the eps = 1 model;
    bounded and vortical members re-solve on the scaled body.
    """
    model = inertia_model(family.base_shape) if family.regime == "unbounded" else None
    workers = threads or thread_count()
    out: dict = {}
    errs: dict = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = {e: pool.submit(_run_member, family, e, T, tol, n_out, model)
                for e in family.epsilons}
        for e, fut in futs.items():
            try:
                out[e] = fut.result()
                if out[e].status != "ok":
                    errs[e] = f"{out[e].status}: {out[e].message}"
            except (FluidBodyError, ValueError, np.linalg.LinAlgError) as exc:
                out[e] = None
                errs[e] = f"{type(exc).__name__}: {exc}"
    return FamilyRun(family, out, errs)


# ---------------------------------------------------------------------------
# reference solutions of the limit systems


def circle_reference(h0, l0, gamma: float, m: float, t) -> tuple:
    """Exact solution of m h'' = gamma perp(h'): (h, h') on the grid t."""
    h0, l0 = np.asarray(h0, float), np.asarray(l0, float)
    t = np.asarray(t, dtype=float)
    w = gamma / m
    c, s = np.cos(w * t), np.sin(w * t)
    hd = np.column_stack([c * l0[0] - s * l0[1], s * l0[0] + c * l0[1]])
    h = h0 + (m / gamma) * (np.array([-l0[1], l0[0]]) - np.column_stack([-hd[:, 1], hd[:, 0]]))
    return h, hd


def reference_for(family: EpsilonFamily, t, tol: float = 1e-12) -> tuple:
    """(h, h') of the zero-radius limit system for a family, on the grid t."""
    t = np.asarray(t, dtype=float)
    T = float(t[-1])
    m = family.base_shape.mass
    massive = family.alpha == 0
    hd0 = np.asarray(family.l0, float) + (family.drift(family.h0) if family.drift_start else 0.0)
    if family.regime == "unbounded":
        if massive:
            return circle_reference(family.h0, hd0, family.gamma, m, t)
        h = np.tile(np.asarray(family.h0, float), (len(t), 1))
        return h, np.zeros_like(h)
    if family.regime == "bounded":
        mode = "massive" if massive else "massless"
        tt, H, Hd, _ = simulate_bounded_limit(family.omega, family.h0, family.gamma, mode, T,
                                              tol, m, hd0 if massive else None, t_eval=t)
        if len(tt) != len(t):
            raise FluidBodyError("limit reference left the cavity before the final time")
        return H, Hd
    cloud = family.cloud if family.cloud is not None else VortexCloud.empty()
    if not massive and len(cloud) == 1:
        h, _, w = two_vortex_solution(family.h0, cloud.positions[0], family.gamma,
                                      float(cloud.strengths[0]), t)
        g, s = family.gamma, float(cloud.strengths[0])
        cen = (g * np.asarray(family.h0, float) + s * cloud.positions[0]) / (g + s)
        d = h - cen
        return h, w * np.column_stack([-d[:, 1], d[:, 0]])
    mode = "massive" if massive else "massless"
    tt, H, Hd, _ = simulate_limit(mode, family.h0, family.gamma, cloud, T, tol, m,
                                  hd0 if massive else None, t_eval=t)
    return H, Hd


# ---------------------------------------------------------------------------
# reports


def empirical_rates(eps, err) -> list:
    """log(e_k / e_{k+1}) / log(eps_k / eps_{k+1}); the first entry is None."""
    rates: list = [None]
    for k in range(1, len(eps)):
        a, b = err[k - 1], err[k]
        if a > 0 and b > 0:
            rates.append(math.log(a / b) / math.log(eps[k - 1] / eps[k]))
        else:
            rates.append(None)
    return rates


def convergence_report(trajectories: dict, reference) -> list:
    """Per-eps sup-norm errors of h, h' and eps theta' against a reference.

    ``reference`` is ``(h, h')`` on the common time grid, or a callable
    ``t -> (h, h')``.  Trajectories are compared on their own grid.
    """
    rows = []
    eps_list = sorted((e for e, tr in trajectories.items() if tr is not None), reverse=True)
    for e in eps_list:
        tr = trajectories[e]
        h_ref, hd_ref = reference(tr.times) if callable(reference) else reference
        n = len(tr.times)
        eh = np.abs(tr.h - np.asarray(h_ref)[:n]).max(initial=0.0)
        ehd = np.abs(tr.hdot - np.asarray(hd_ref)[:n]).max(initial=0.0)
        rows.append({"epsilon": float(e), "sup_err_h": float(eh), "sup_err_hprime": float(ehd),
                     "sup_eps_thetadot": float(np.abs(e * tr.r).max(initial=0.0))})
    rates = empirical_rates([r["epsilon"] for r in rows], [r["sup_err_h"] for r in rows])
    for r, k in zip(rows, rates):
        r["rate"] = k
    return rows


def is_monotone_decreasing(values) -> bool:
    v = list(values)
    return all(b < a for a, b in zip(v, v[1:]))


def modulated_diagnostics(traj: Trajectory, regime: str, eps: float, gamma: float = 0.0,
                          omega: Contour | None = None, xi=None) -> np.ndarray:
    """Time series of the modulated velocity, shape (n, 3).

    bounded: (h' - gamma u_Omega(h), eps theta').
    vortical: (h' - K[omega](h) - grad K[omega](h) R(theta) xi_eps, eps theta')
    with the cloud taken from the trajectory and ``xi`` the conformal
    centre of the scaled body.
    """
    out = np.zeros((len(traj.times), 3))
    out[:, 2] = eps * traj.r
    hd = traj.hdot
    if regime == "bounded":
        if omega is None:
            raise ValueError("bounded diagnostics need the cavity")
        rs = routh_solver(omega)
        for k, h in enumerate(traj.h):
            out[k, :2] = hd[k] - (gamma * rs.velocity(h) if gamma else 0.0)
    elif regime == "vortical":
        xi = np.zeros(2) if xi is None else np.asarray(xi, float)
        for k, h in enumerate(traj.h):
            if traj.cloud is None or traj.cloud.shape[1] == 0:
                out[k, :2] = hd[k]
                continue
            cl = VortexCloud(traj.cloud[k], traj.strengths)
            u = biot_savart_plane(cl, h)
            g = biot_savart_gradient(cl, h)
            out[k, :2] = hd[k] - u - g @ (rot(traj.theta[k]) @ xi)
    elif regime == "unbounded":
        out[:, :2] = hd
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return out


def leading_order_E_check(omega: Contour, shape: BodyShape, q, epsilons) -> list:
    """Deviation of I_eps^{-1} E^eps(q) from E0(q) for each eps."""
    q = np.asarray(q, dtype=float)
    u = routh_solver(omega).velocity(q[:2])
    xi, _ = conformal_center(shape)
    E0 = leading_order_E(u, xi, q[2])
    rows = []
    for e in epsilons:
        E, _ = lorentz_fields(omega, shape.scaled(e), q)
        Eu = E / np.array([1.0, 1.0, e])
        rows.append({"epsilon": float(e), "E": Eu.tolist(), "E0": E0.tolist(),
                     "deviation": float(np.linalg.norm(Eu - E0))})
    return rows


def family_report(run: FamilyRun, t_ref_tol: float = 1e-12) -> list:
    """Report rows {epsilon, sup_err_h, sup_err_hprime, rate} for a run."""
    ok = {e: tr for e, tr in run.trajectories.items() if tr is not None}
    if not ok:
        return []
    grid = max(ok.values(), key=lambda tr: len(tr.times)).times
    h_ref, hd_ref = reference_for(run.family, grid, t_ref_tol)
    rows = convergence_report(ok, (h_ref, hd_ref))
    return [{k: r[k] for k in ("epsilon", "sup_err_h", "sup_err_hprime", "rate")} for r in rows]
