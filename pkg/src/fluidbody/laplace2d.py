"""Boundary-integral solver for the harmonic fields of the fluid domain.

Every field is written through Green's representation formula on the
fluid boundary,

    u(x) = sum_contours  oint ( u dG/dnu_y - G du/dnu ) ds_y  + u_inf,

with G(x, y) = log|x - y| / (2 pi) and nu the normal pointing out of the
fluid.  The unknown half of the Cauchy data is found by Nystrom
collocation at the nodes: the double-layer kernel is smooth on a smooth
curve and uses its curvature limit on the diagonal, and the logarithmic
singularity of the single layer is integrated with Kress' spectral
weights.  Tangential derivatives come from FFT differentiation.  Points
close to a contour are evaluated on a finer node set with Fourier
interpolated densities.

Fields solved here:

* exterior Neumann problems (Kirchhoff potentials Phi_i, corrections),
* the circulation field H, its stream function Psi_H,
* the exterior Dirichlet Green function of the body,
* the stream function psi(q, .) and capacity C(q) in a cavity Omega,
* the bounded Kirchhoff potentials, and the Routh function of Omega.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import ClearanceError, GeometryError, SolverError
from .geometry import TWO_PI, BodyShape, Contour, perp, place

MAX_REFINE = 8192
CHUNK_ENTRIES = 2**21  # target-node pairs per kernel block
INV_2PI = 1.0 / TWO_PI


# ---------------------------------------------------------------------------
# periodic spectral helpers


def _wavenumbers(n):
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return k


def fourier_diff(f, axis=0):
    """d/dt of equispaced periodic samples on [0, 2 pi)."""
    f = np.asarray(f, dtype=float)
    n = f.shape[axis]
    shape = [1] * f.ndim
    shape[axis] = n
    k = _wavenumbers(n).reshape(shape)
    return np.real(np.fft.ifft(1j * k * np.fft.fft(f, axis=axis), axis=axis))


def fourier_antiderivative(f, axis=0):
    """Antiderivative vanishing at t=0 of a zero-mean periodic function."""
    f = np.asarray(f, dtype=float)
    n = f.shape[axis]
    shape = [1] * f.ndim
    shape[axis] = n
    k = _wavenumbers(n).reshape(shape)
    fh = np.fft.fft(f, axis=axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        gh = np.where(k != 0, fh / (1j * k), 0.0)
    g = np.real(np.fft.ifft(gh, axis=axis))
    return g - np.take(g, [0], axis=axis)


def fourier_upsample(f, k: int, axis=0):
    """Trigonometric interpolation of periodic samples onto k times more nodes."""
    if k == 1:
        return np.asarray(f, dtype=float)
    f = np.asarray(f, dtype=float)
    f = np.moveaxis(f, axis, 0)
    n = f.shape[0]
    fh = np.fft.fft(f, axis=0)
    m = n * k
    gh = np.zeros((m,) + f.shape[1:], dtype=complex)
    h = n // 2
    gh[:h] = fh[:h]
    gh[m - h + (n % 2 == 0):] = fh[h + (n % 2 == 0):]
    if n % 2 == 0:  # split the Nyquist mode symmetrically
        gh[h] = 0.5 * fh[h]
        gh[m - h] = 0.5 * fh[h]
    g = np.real(np.fft.ifft(gh, axis=0)) * k
    return np.moveaxis(g, 0, axis)


def kress_weights(n: int) -> np.ndarray:
    """R_j(0) for the quadrature of oint log(4 sin^2((s-t)/2)) f(t) dt.

    Returns the circulant row: entry m is the weight for t_j - s = 2 pi m/n.
    """
    if n % 2:
        raise ValueError("Kress quadrature needs an even number of nodes")
    h = n // 2
    tau = TWO_PI * np.arange(n) / n
    m = np.arange(1, h)
    row = -(TWO_PI / h) * (np.cos(np.outer(tau, m)) / m).sum(1)
    row -= (np.pi / h**2) * np.cos(h * tau)
    return row


# ---------------------------------------------------------------------------
# layer matrices


def slp_self(c: Contour) -> np.ndarray:
    n = c.n
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    R = kress_weights(n)[idx]
    d = c.x[:, None, :] - c.x[None, :, :]
    r2 = (d**2).sum(-1)
    dt = c.t[:, None] - c.t[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        L = 0.5 * np.log(r2 / (4.0 * np.sin(0.5 * dt) ** 2))
    L[np.diag_indices(n)] = np.log(c.speed)
    return INV_2PI * (0.5 * R + (TWO_PI / n) * L) * c.speed[None, :]


def dlp_self(c: Contour) -> np.ndarray:
    d = c.x[None, :, :] - c.x[:, None, :]  # y_j - x_i
    r2 = (d**2).sum(-1)
    np.fill_diagonal(r2, 1.0)
    K = np.einsum("ijk,jk->ij", d, c.normal) / r2
    diag = -np.einsum("ij,ij->i", c.ddx, c.normal) / (2.0 * c.speed**2)
    K[np.diag_indices(c.n)] = diag
    return INV_2PI * K * c.ds[None, :]


def slp(targets, c: Contour) -> np.ndarray:
    d = np.asarray(targets)[:, None, :] - c.x[None, :, :]
    return INV_2PI * 0.5 * np.log((d**2).sum(-1)) * c.ds[None, :]


def dlp(targets, c: Contour) -> np.ndarray:
    d = c.x[None, :, :] - np.asarray(targets)[:, None, :]
    return INV_2PI * np.einsum("ijk,jk->ij", d, c.normal) / (d**2).sum(-1) * c.ds[None, :]


def grad_slp(targets, c: Contour) -> np.ndarray:
    d = np.asarray(targets)[:, None, :] - c.x[None, :, :]
    r2 = (d**2).sum(-1)
    return INV_2PI * d / r2[..., None] * c.ds[None, :, None]


def grad_dlp(targets, c: Contour) -> np.ndarray:
    d = np.asarray(targets)[:, None, :] - c.x[None, :, :]  # x - y
    r2 = (d**2).sum(-1)[..., None]
    dn = np.einsum("ijk,jk->ij", d, c.normal)[..., None]
    g = -(c.normal[None] / r2 - 2.0 * dn * d / r2**2)
    return INV_2PI * g * c.ds[None, :, None]


def _factor(A, label):
    lu = sla.lu_factor(A, check_finite=True)
    u = np.abs(np.diag(lu[0]))
    if not np.all(np.isfinite(u)) or u.min() <= 1e-13 * u.max():
        cond = np.linalg.cond(A)
        raise SolverError(f"{label}: singular boundary system (condition number {cond:.3e})")
    return lu


def _solve(lu, b):
    x = sla.lu_solve(lu, b)
    if not np.all(np.isfinite(x)):
        raise SolverError("non-finite boundary density")
    return x


def _level(spacing: float, d) -> np.ndarray:
    k = np.minimum(4.0 * spacing / np.maximum(d, 1e-300), MAX_REFINE)
    return 2 ** np.ceil(np.log2(np.maximum(k, 1.0))).astype(int)


# ---------------------------------------------------------------------------
# represented fields


@dataclass
class BoundaryField:
    """A harmonic field given by its Cauchy data on one or more contours.

    ``trace`` and ``flux`` are (nodes,) or (nodes, m) arrays stacked over
    ``contours``; ``flux`` is the derivative along the fluid-outward
    normal.  ``analytic`` holds explicit singular parts as tuples
    ``(kind, centre, strength)`` with kind ``'vortex'`` (gradient
    strength * perp(x-c)/(2 pi |x-c|^2), value not single-valued) or
    ``'source'`` (value strength * log|x-c|/(2 pi)).  These parts are NOT
    included in trace/flux.
    """

    kind: str
    contours: list
    trace: np.ndarray
    flux: np.ndarray
    constant: np.ndarray | float = 0.0
    analytic: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def _split(self, arr):
        out, i = [], 0
        for c in self.contours:
            out.append(arr[i:i + c.n])
            i += c.n
        return out

    # -- boundary data -----------------------------------------------------

    def boundary_gradient(self) -> np.ndarray:
        """Full gradient at the nodes, shape (nodes, [m,] 2)."""
        parts = []
        for c, ph, g in zip(self.contours, self._split(self.trace), self._split(self.flux)):
            dphi = fourier_diff(ph) / (c.speed if ph.ndim == 1 else c.speed[:, None])
            if ph.ndim == 1:
                parts.append(g[:, None] * c.normal + dphi[:, None] * c.tau)
            else:
                parts.append(g[..., None] * c.normal[:, None, :]
                             + dphi[..., None] * c.tau[:, None, :])
        grad = np.concatenate(parts, axis=0)
        xb = np.concatenate([c.x for c in self.contours])
        return grad + self._analytic_grad(xb, grad.ndim)

    def tangential_derivative(self) -> np.ndarray:
        parts = []
        for c, ph in zip(self.contours, self._split(self.trace)):
            dphi = fourier_diff(ph)
            parts.append(dphi / (c.speed if ph.ndim == 1 else c.speed[:, None]))
        return np.concatenate(parts, axis=0)

    # -- evaluation --------------------------------------------------------

    def _analytic_grad(self, x, ndim):
        shape = (len(x), 2) if ndim == 2 else (len(x), 1, 2)
        out = np.zeros(shape)
        for kind, c, s in self.analytic:
            d = x - np.asarray(c)
            r2 = (d**2).sum(-1, keepdims=True)
            v = (perp(d) if kind == "vortex" else d) / r2 * (INV_2PI * s)
            out += v if ndim == 2 else v[:, None, :]
        return out

    def _analytic_value(self, x):
        out = np.zeros(len(x))
        for kind, c, s in self.analytic:
            if kind == "vortex":
                raise ValueError("potential of a circulating field is multivalued")
            out += INV_2PI * s * 0.5 * np.log(((x - np.asarray(c)) ** 2).sum(-1))
        return out

    def _check_domain(self, x):
        for c in self.contours:
            inside = c.contains(x)
            bad = inside if c.side == "body" else ~inside
            if bad.any():
                where = "inside the body" if c.side == "body" else "outside the cavity"
                raise GeometryError(f"evaluation point {x[bad][0]} lies {where}")

    def _groups(self, x):
        """Refinement level per point and contour: a power of two with
        node spacing below a quarter of the distance, capped at MAX_REFINE.

        The distance is re-measured on the refined nodes until the level
        settles, since node distance overestimates the curve distance.
        """
        levels = []
        for c in self.contours:
            d = c.min_distance(x)
            k = _level(c.spacing, d)
            for _ in range(8):
                changed = False
                for kk in np.unique(k[k > 1]):
                    sel = k == kk
                    k_new = _level(c.spacing, c.refined(int(kk)).min_distance(x[sel]))
                    k_new = np.maximum(k_new, kk)
                    if np.any(k_new != kk):
                        changed = True
                        k[sel] = k_new
                if not changed:
                    break
            levels.append(k)
        return levels

    def _layer_eval(self, x, want_grad):
        multi = self.trace.ndim == 2
        m = self.trace.shape[1] if multi else 1
        val = np.zeros((len(x), m))
        grad = np.zeros((len(x), m, 2))
        levels = self._groups(x)
        for c, ph, g, lev in zip(self.contours, self._split(self.trace),
                                 self._split(self.flux), levels):
            ph = ph.reshape(c.n, -1)
            g = g.reshape(c.n, -1)
            for k in np.unique(lev):
                sel = lev == k
                ck = c if k == 1 else c.refined(int(k))
                phk = fourier_upsample(ph, int(k))
                gk = fourier_upsample(g, int(k))
                idx = np.flatnonzero(sel)
                step = max(1, CHUNK_ENTRIES // ck.n)
                for i in range(0, len(idx), step):
                    part = idx[i:i + step]
                    xs = x[part]
                    if want_grad:
                        grad[part] += (np.einsum("ijk,jm->imk", grad_dlp(xs, ck), phk)
                                       - np.einsum("ijk,jm->imk", grad_slp(xs, ck), gk))
                    else:
                        val[part] += dlp(xs, ck) @ phk - slp(xs, ck) @ gk
        return val, grad

    def value(self, points, check: bool = True) -> np.ndarray:
        x = np.atleast_2d(np.asarray(points, dtype=float))
        if check:
            self._check_domain(x)
        val, _ = self._layer_eval(x, False)
        val = val + np.asarray(self.constant)
        val += self._analytic_value(x)[:, None]
        return val if self.trace.ndim == 2 else val[:, 0]

    def gradient(self, points, check: bool = True) -> np.ndarray:
        x = np.atleast_2d(np.asarray(points, dtype=float))
        if check:
            self._check_domain(x)
        _, grad = self._layer_eval(x, True)
        grad += self._analytic_grad(x, 3)
        return grad if self.trace.ndim == 2 else grad[:, 0, :]


def eval_field(field: BoundaryField, points, what: str = "gradient"):
    """Sample a field at points of its fluid domain ('value' or 'gradient')."""
    if what == "value":
        return field.value(points)
    if what == "gradient":
        return field.gradient(points)
    raise ValueError(what)


# ---------------------------------------------------------------------------
# unbounded exterior of one body (body frame)


_EXTERIOR_CACHE: "weakref.WeakKeyDictionary[BodyShape, ExteriorSolver]" = \
    weakref.WeakKeyDictionary()


class ExteriorSolver:
    """Factored boundary systems of the exterior of a body, in its frame."""

    def __init__(self, shape: BodyShape):
        self.shape = shape
        c = self.contour = shape.contour
        n = c.n
        self.S = slp_self(c)
        self.K = dlp_self(c)
        self.A = 0.5 * np.eye(n) - self.K
        self._neu = _factor(self.A, "exterior Neumann")
        D = np.zeros((n + 1, n + 1))
        D[:n, :n] = self.S
        D[:n, n] = -1.0
        D[n, :n] = c.ds
        self._dir = _factor(D, "exterior Dirichlet")
        self._kirchhoff = None
        self._H = None
        self._psiH = None

    @classmethod
    def for_shape(cls, shape: BodyShape) -> "ExteriorSolver":
        s = _EXTERIOR_CACHE.get(shape)
        if s is None:
            s = cls(shape)
            _EXTERIOR_CACHE[shape] = s
        return s

    # -- raw solves --------------------------------------------------------

    def neumann_trace(self, g) -> np.ndarray:
        """Trace of the decaying exterior solution with normal derivative g."""
        g = np.asarray(g, dtype=float)
        return _solve(self._neu, -self.S @ g)

    def neumann(self, g, kind="exterior-neumann", analytic=None) -> BoundaryField:
        return BoundaryField(kind, [self.contour], self.neumann_trace(g), np.asarray(g, float),
                             0.0, analytic or [])

    def dirichlet(self, f, kind="exterior-dirichlet", analytic=None) -> BoundaryField:
        """Bounded exterior solution with trace f (it tends to a constant)."""
        f = np.asarray(f, dtype=float)
        n = self.contour.n
        rhs = self.K @ f - 0.5 * f
        if f.ndim == 1:
            sol = _solve(self._dir, np.append(rhs, 0.0))
            sigma, uinf = sol[:n], sol[n]
        else:
            sol = _solve(self._dir, np.vstack([rhs, np.zeros((1, f.shape[1]))]))
            sigma, uinf = sol[:n], sol[n]
        return BoundaryField(kind, [self.contour], f, sigma, uinf, analytic or [])

    # -- named fields ------------------------------------------------------

    def kirchhoff(self) -> BoundaryField:
        if self._kirchhoff is None:
            K = self.shape.K
            compat = np.abs(self.contour.ds @ K).max()
            if compat > 1e-10 * self.contour.perimeter:
                raise SolverError(f"Neumann data incompatible (oint K = {compat:.2e})")
            self._kirchhoff = self.neumann(K, kind="exterior-neumann")
        return self._kirchhoff

    def harmonic_field(self) -> BoundaryField:
        """H = perp(x-c)/(2 pi |x-c|^2) + grad chi with H.n = 0, centre c = 0."""
        if self._H is None:
            c = self.contour
            v0 = perp(c.x) / (c.x**2).sum(-1, keepdims=True) * INV_2PI
            g = -np.einsum("ij,ij->i", v0, c.normal)
            self._H = self.neumann(g, kind="exterior-circulation",
                                   analytic=[("vortex", (0.0, 0.0), 1.0)])
        return self._H

    def H_boundary(self) -> np.ndarray:
        """Tangential component H.tau at the nodes (H.n is zero)."""
        H = self.harmonic_field()
        return np.einsum("ij,ij->i", H.boundary_gradient(), self.contour.tau)

    def stream_H(self) -> BoundaryField:
        """Psi_H = log|x|/(2 pi) + eta, zero on the body (Dirichlet route)."""
        if self._psiH is None:
            x = self.contour.x
            f = -INV_2PI * 0.5 * np.log((x**2).sum(-1))
            self._psiH = self.dirichlet(f, kind="exterior-dirichlet",
                                        analytic=[("source", (0.0, 0.0), 1.0)])
        return self._psiH

    def green_regular(self, sources) -> BoundaryField:
        """w_y with w_y = -log|x-y|/(2 pi) on the body, one column per source y.

        log|x-y|/(2 pi) + w_y(x) vanishes on the body but grows like
        log|x|/(2 pi); subtracting Psi_H(x) gives the symmetric Green
        function that stays bounded at infinity.
        """
        y = np.atleast_2d(sources)
        d = self.contour.x[:, None, :] - y[None, :, :]
        f = -INV_2PI * 0.5 * np.log((d**2).sum(-1))
        return self.dirichlet(f, kind="exterior-dirichlet")

    def conjugate(self, f: BoundaryField) -> BoundaryField:
        """Stream function theta of grad(chi) for a single-valued Neumann field.

        grad chi = perp(grad theta), theta -> 0 at infinity.  On the body
        d theta/ds = d chi/dn and d theta/dn = -d chi/ds.
        """
        c = self.contour
        g = f.flux
        sp = c.speed if g.ndim == 1 else c.speed[:, None]
        base = fourier_antiderivative(g * sp)
        dn = -f.tangential_derivative()
        ones = np.ones(c.n)
        a = self.A @ ones
        b = -self.S @ dn - self.A @ base
        theta0 = (a @ b) / (a @ a)
        trace = base + (theta0 if g.ndim == 1 else theta0[None, :])
        return BoundaryField("exterior-dirichlet", [c], trace, dn, 0.0, [])


def kirchhoff_potentials_exterior(shape: BodyShape) -> BoundaryField:
    """Phi_1, Phi_2, Phi_3 as one three-column field (body frame)."""
    return ExteriorSolver.for_shape(shape).kirchhoff()


def harmonic_field(shape: BodyShape) -> BoundaryField:
    return ExteriorSolver.for_shape(shape).harmonic_field()


# ---------------------------------------------------------------------------
# bounded domain: body S(q) inside the cavity Omega


_SELF_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _self_blocks(key, contour_factory):
    blk = _SELF_CACHE.get(key)
    if blk is None:
        c = contour_factory()
        blk = (slp_self(c), dlp_self(c))
        _SELF_CACHE[key] = blk
    return blk


class _CavityKey:
    """Weak-referenceable cache key attached to a cavity contour."""


def _cavity_blocks(omega: Contour):
    key = getattr(omega, "_cache_key", None)
    if key is None:
        key = omega._cache_key = _CavityKey()
    return _self_blocks(key, lambda: omega)


def clearance(omega: Contour, body: Contour) -> float:
    d = body.x[:, None, :] - omega.x[None, :, :]
    dist = float(np.sqrt((d**2).sum(-1)).min())
    if not omega.contains(body.x[:1])[0]:
        return -dist
    return dist


class ConfinedSolver:
    """Boundary systems of F(q) = Omega minus S(q), lab frame."""

    def __init__(self, omega: Contour, shape: BodyShape, q, min_clearance: float = 0.0):
        self.omega = omega
        self.shape = shape
        self.q = np.asarray(q, dtype=float)
        body = self.body = place(shape, self.q)
        self.gap = clearance(omega, body)
        inside = omega.contains(body.x).all()
        if not inside or self.gap <= min_clearance:
            raise ClearanceError(
                f"body at q={self.q.tolist()} has clearance {self.gap:.4g} to the cavity wall")
        Sb, Kb = _self_blocks(shape, lambda: body)
        So, Ko = _cavity_blocks(omega)
        nb, no = body.n, omega.n
        n = nb + no
        S = np.empty((n, n))
        K = np.empty((n, n))
        S[:nb, :nb], K[:nb, :nb] = Sb, Kb
        S[nb:, nb:], K[nb:, nb:] = So, Ko
        S[:nb, nb:], K[:nb, nb:] = slp(body.x, omega), dlp(body.x, omega)
        S[nb:, :nb], K[nb:, :nb] = slp(omega.x, body), dlp(omega.x, body)
        self.S, self.K = S, K
        self.nb, self.no = nb, no
        self.ds = np.concatenate([body.ds, omega.ds])
        A = 0.5 * np.eye(n) - K
        self.A = A
        self._kirchhoff = None
        self._stream = None

    def _neumann_lu(self):
        n, nb = self.nb + self.no, self.nb
        N = np.zeros((n + 1, n + 1))
        N[:n, :n] = self.A
        N[:n, n] = 1.0
        N[n, nb:n] = self.omega.ds
        return _factor(N, "bounded Neumann")

    def _dirichlet_lu(self):
        # unknown flux sigma on both contours and C; (S + 1 ds^T) removes the
        # log-capacity degeneracy, and the true flux has zero total so the
        # solution is unchanged
        n, nb = self.nb + self.no, self.nb
        D = np.zeros((n + 1, n + 1))
        D[:n, :n] = self.S + np.outer(np.ones(n), self.ds)
        D[:n, n] = self.A[:, :nb].sum(1)
        D[n, :nb] = self.body.ds
        return _factor(D, "bounded Dirichlet")

    @property
    def contours(self):
        return [self.body, self.omega]

    def kirchhoff_data(self) -> np.ndarray:
        b = self.body
        g = np.zeros((self.nb + self.no, 3))
        g[:self.nb, :2] = b.normal
        g[:self.nb, 2] = np.einsum("ij,ij->i", perp(b.x - self.q[:2]), b.normal)
        return g

    def kirchhoff(self) -> BoundaryField:
        if self._kirchhoff is None:
            g = self.kirchhoff_data()
            rhs = np.vstack([-self.S @ g, np.zeros((1, 3))])
            sol = _solve(self._neumann_lu(), rhs)
            self._kirchhoff = BoundaryField("annular-neumann", self.contours, sol[:-1], g,
                                            0.0, [], {"q": self.q.tolist(), "multiplier": sol[-1]})
        return self._kirchhoff

    def stream(self) -> BoundaryField:
        if self._stream is None:
            n = self.nb + self.no
            rhs = np.zeros(n + 1)
            rhs[n] = -1.0
            sol = _solve(self._dirichlet_lu(), rhs)
            sigma, C = sol[:n], sol[n]
            trace = np.zeros(n)
            trace[:self.nb] = C
            self._stream = BoundaryField("annular-dirichlet", self.contours, trace, sigma,
                                         0.0, [], {"q": self.q.tolist(), "C": float(C)})
        return self._stream

    @property
    def capacity(self) -> float:
        return self.stream().meta["C"]


def stream_with_capacity(omega: Contour, shape: BodyShape, q):
    """psi(q, .) and the capacity constant C(q)."""
    s = ConfinedSolver(omega, shape, q)
    f = s.stream()
    return f, f.meta["C"]


def kirchhoff_potentials_bounded(omega: Contour, shape: BodyShape, q) -> BoundaryField:
    return ConfinedSolver(omega, shape, q).kirchhoff()


# ---------------------------------------------------------------------------
# Routh function of the cavity


class RouthSolver:
    """psi_Omega(h) = psi0(h, h)/2 for the cavity Omega."""

    def __init__(self, omega: Contour):
        self.omega = omega
        self.diam = omega.diameter()
        self.h_fd = 1e-4 * self.diam
        desc = getattr(omega, "descriptor", {}) or {}
        self.disc = None
        if desc.get("shape") == "disc" and "angle" not in desc:
            self.disc = (np.asarray(desc.get("center", (0.0, 0.0)), float),
                         float(desc.get("radius", 1.0)))
        So, Ko = _cavity_blocks(omega)
        self.K = Ko
        n = omega.n
        self._lu = _factor(So + np.outer(np.ones(n), omega.ds), "cavity Dirichlet")

    def psi0(self, h, x):
        """Harmonic lift at points x of -log|. - h|/(2 pi) on the wall."""
        h = np.asarray(h, dtype=float)
        o = self.omega
        f = -INV_2PI * 0.5 * np.log(((o.x - h) ** 2).sum(-1))
        sigma = _solve(self._lu, (self.K - 0.5 * np.eye(o.n)) @ f)
        fld = BoundaryField("interior-dirichlet", [o], f, sigma)
        return fld.value(np.atleast_2d(x), check=False)

    def _check(self, h):
        if not self.omega.contains(h[None])[0]:
            raise ClearanceError(f"point {h.tolist()} is outside the cavity")
        if self.omega.min_distance(h[None])[0] <= self.h_fd:
            raise ClearanceError(f"point {h.tolist()} lies within h_fd of the wall")

    def psi(self, h) -> float:
        h = np.asarray(h, dtype=float)
        self._check(h)
        if self.disc is not None:
            c, R = self.disc
            d = h - c
            return float(-np.log((R**2 - d @ d) / R) / (2.0 * TWO_PI))
        return float(0.5 * self.psi0(h, h)[0])

    def velocity(self, h) -> np.ndarray:
        """u_Omega = perp(grad psi_Omega)."""
        h = np.asarray(h, dtype=float)
        self._check(h)
        if self.disc is not None:
            c, R = self.disc
            d = h - c
            return perp(d) / (TWO_PI * (R**2 - d @ d))
        return self.velocity_fd(h)

    def velocity_fd(self, h) -> np.ndarray:
        dh = self.h_fd
        gx = (self.psi(h + [dh, 0]) - self.psi(h - [dh, 0])) / (2 * dh)
        gy = (self.psi(h + [0, dh]) - self.psi(h - [0, dh])) / (2 * dh)
        return np.array([-gy, gx])


_ROUTH_CACHE: dict = {}


def routh_solver(omega: Contour) -> RouthSolver:
    s = _ROUTH_CACHE.get(id(omega))
    if s is None or s.omega is not omega:
        s = RouthSolver(omega)
        _ROUTH_CACHE[id(omega)] = s
    return s


def routh_velocity(omega: Contour, h):
    """(psi_Omega(h), u_Omega(h))."""
    s = routh_solver(omega)
    return s.psi(h), s.velocity(h)
