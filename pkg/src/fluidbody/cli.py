"""Command line front end: scenario files, runs and output files.

Scenarios are strict TOML (unknown keys are errors)::

    regime = "bounded"        # unbounded | bounded | vortical
    gamma = 6.283185307179586
    T = 1.0
    panels = 64

    [body]
    shape = "disc"
    radius = 0.1
    mass = 1.0

    [cavity]
    shape = "disc"
    radius = 1.0

    [initial]
    h = [0.3, 0.0]
    l = [0.0, 0.0]

Exit status: 0 success, 2 configuration, 3 collision, 4 solver failure,
1 for a failing ``verify`` run.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .coefficients import bounded_coefficients, conformal_center, inertia_model
from .dynamics import collision_distance, simulate_bounded, simulate_unbounded, stop_distance
from .errors import (ClearanceError, CollisionError, ConfigError, FluidBodyError, GeometryError,
                     SolverError)
from .geometry import BodyShape, Contour, SolidState, build_cavity, build_shape, place
from .limits import (EpsilonFamily, family_report, modulated_diagnostics, run_family,
                     thread_count)
from .verify import reports_to_json, run_suite
from .vortex import VortexCloud, simulate_vortical

EXIT_CODES = {ConfigError: 2, CollisionError: 3, SolverError: 4}
EXIT_VERIFY_FAILED = 1

DIAG_HEADER = ["t", "energy", "clearance", "p1", "p2", "p3"]


# ---------------------------------------------------------------------------
# schema


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ShapeSpec(_Strict):
    shape: Literal["disc", "ellipse", "fourier"]
    radius: float | None = None
    semi_axes: tuple[float, float] | None = None
    cos: list[float] = Field(default_factory=list)
    sin: list[float] = Field(default_factory=list)
    angle: float = 0.0

    def descriptor(self) -> dict:
        d: dict = {"shape": self.shape, "angle": self.angle}
        if self.shape == "ellipse":
            d["semi_axes"] = list(self.semi_axes or (1.0, 1.0))
        else:
            d["radius"] = 1.0 if self.radius is None else self.radius
        if self.shape == "fourier":
            d["cos"], d["sin"] = list(self.cos), list(self.sin)
        return d


class BodySpec(ShapeSpec):
    mass: float = Field(1.0, ge=0.0)
    inertia: float | None = Field(None, ge=0.0)
    center: tuple[float, float] | None = None


class CavitySpec(ShapeSpec):
    center: tuple[float, float] = (0.0, 0.0)
    panels: int | None = Field(None, ge=16)

    def descriptor(self) -> dict:
        d = super().descriptor()
        d["center"] = list(self.center)
        return d


class InitialSpec(_Strict):
    h: tuple[float, float] = (0.0, 0.0)
    theta: float = 0.0
    l: tuple[float, float] = (0.0, 0.0)  # lab-frame h'(0)
    r: float = 0.0


class CloudSpec(_Strict):
    kind: Literal["points", "ring", "grid", "empty"]
    delta: float = Field(1e-2, gt=0.0)
    positions: list[tuple[float, float]] = Field(default_factory=list)
    strengths: list[float] = Field(default_factory=list)
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    half_width: float = 0.5
    n: int = Field(8, ge=1)
    total: float = 1.0

    def build(self, gamma: float) -> VortexCloud:
        if self.kind == "empty":
            return VortexCloud.empty(gamma, self.delta)
        if self.kind == "ring":
            return VortexCloud.ring(self.center, self.radius, self.n, self.total, self.delta,
                                    gamma)
        if self.kind == "grid":
            return VortexCloud.grid(self.center, self.half_width, self.n, self.total, self.delta,
                                    gamma)
        return VortexCloud(np.array(self.positions, float).reshape(-1, 2),
                           np.array(self.strengths, float), self.delta, gamma)


class FamilySpec(_Strict):
    epsilons: list[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1], min_length=1)
    alpha: float = Field(0.0, ge=0.0)
    drift_start: bool = False
    n_out: int = Field(101, ge=2)


class OutputSpec(_Strict):
    dir: str = "."
    trajectory: str = "trajectory.csv"
    cloud: str = "cloud.csv"
    diagnostics: str = "diagnostics.csv"
    family: str = "family.json"
    coefficients: str = "coefficients.json"
    verify: str = "verify.json"


class Scenario(_Strict):
    regime: Literal["unbounded", "bounded", "vortical"] = "unbounded"
    gamma: float = 0.0
    T: float = Field(1.0, gt=0.0)
    tol: float = Field(1e-8, gt=0.0, lt=1.0)
    panels: int = Field(128, ge=16)
    n_out: int = Field(201, ge=2)
    frame: Literal["lab", "body"] = "lab"
    body: BodySpec
    cavity: CavitySpec | None = None
    initial: InitialSpec = Field(default_factory=InitialSpec)
    cloud: CloudSpec | None = None
    family: FamilySpec | None = None
    output: OutputSpec = Field(default_factory=OutputSpec)

    def shape(self) -> BodyShape:
        b = self.body
        return build_shape(b.descriptor(), self.panels, b.mass, b.inertia, b.center)

    def omega(self) -> Contour | None:
        if self.cavity is None:
            return None
        return build_cavity(self.cavity.descriptor(), self.cavity.panels or self.panels)

    def vortex_cloud(self) -> VortexCloud:
        return (self.cloud or CloudSpec(kind="empty")).build(self.gamma)

    def state0(self) -> SolidState:
        i = self.initial
        R = np.array([[np.cos(i.theta), -np.sin(i.theta)], [np.sin(i.theta), np.cos(i.theta)]])
        return SolidState(i.h, i.theta, R.T @ np.asarray(i.l, float), i.r)

    def out_path(self, name: str) -> Path:
        return Path(self.output.dir) / getattr(self.output, name)


# ---------------------------------------------------------------------------
# loading with line diagnostics

_HEADER = re.compile(r"^\s*\[\[?\s*([^\]]+?)\s*\]\]?\s*(#.*)?$")
_KEY = re.compile(r"^\s*([A-Za-z0-9_\-\.\"' ]+?)\s*=")


def _split_key(raw: str) -> tuple:
    return tuple(p.strip().strip("\"'") for p in raw.split("."))


def key_lines(text: str) -> dict:
    """Map dotted key paths to the 1-based line where they are set."""
    lines: dict = {}
    prefix: tuple = ()
    depth = 0
    for n, line in enumerate(text.splitlines(), 1):
        if depth == 0:
            m = _HEADER.match(line)
            if m:
                prefix = _split_key(m.group(1))
                lines.setdefault(prefix, n)
                continue
            m = _KEY.match(line)
            if m:
                lines.setdefault(prefix + _split_key(m.group(1)), n)
        code = re.sub(r"\"[^\"]*\"|'[^']*'|#.*", "", line)
        depth = max(0, depth + code.count("[") - code.count("]"))
    return lines


def _locate(lines: dict, loc: tuple) -> int | None:
    loc = tuple(str(p) for p in loc if not isinstance(p, int))
    for k in range(len(loc), 0, -1):
        if loc[:k] in lines:
            return lines[loc[:k]]
    return None


def _diag(path, lines: dict, loc: tuple, msg: str) -> str:
    key = ".".join(str(p) for p in loc) or "<root>"
    line = _locate(lines, loc)
    where = f"{path}:{line}" if line else str(path)
    return f"{where}: {key}: {msg}"


def parse_scenario(path, overrides: dict | None = None) -> Scenario:
    """Read and validate a scenario file; raises ConfigError with line/key context."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    lines = key_lines(text)
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    try:
        sc = Scenario.model_validate(data)
    except ValidationError as exc:
        msgs = [_diag(path, lines, e["loc"], e["msg"]) for e in exc.errors()]
        raise ConfigError("\n".join(msgs)) from None
    _check_rules(sc, path, lines)
    return sc


def _check_rules(sc: Scenario, path, lines: dict) -> None:
    def fail(loc: tuple, msg: str):
        raise ConfigError(_diag(path, lines, loc, msg))

    if sc.regime == "bounded" and sc.cavity is None:
        fail(("regime",), "bounded regime needs a [cavity] table")
    if sc.regime == "vortical" and sc.cloud is None:
        fail(("regime",), "vortical regime needs a [cloud] table (kind = \"empty\" for none)")
    if sc.cloud is not None and sc.cloud.kind == "points" and \
            len(sc.cloud.positions) != len(sc.cloud.strengths):
        fail(("cloud", "strengths"), "positions and strengths differ in length")
    fam = sc.family
    if fam is not None:
        eps = fam.epsilons
        if any(not 0.0 < e <= 1.0 for e in eps) or any(a <= b for a, b in zip(eps, eps[1:])):
            fail(("family", "epsilons"), "epsilons must be strictly decreasing in (0, 1]")
        if fam.alpha > 0 and sc.gamma == 0.0:
            fail(("family", "alpha"),
                 "a massless family (alpha > 0) requires a nonzero circulation gamma")
    try:
        shape = sc.shape()
        omega = sc.omega()
    except GeometryError as exc:
        fail(("body",), str(exc))
    if omega is not None and sc.regime == "bounded":
        q = np.array([*sc.initial.h, sc.initial.theta])
        body = place(shape, q)
        inside = omega.contains(body.x).all()
        try:
            gap = collision_distance(omega, shape, q) if inside else -1.0
        except GeometryError:
            gap = -1.0
        if not inside:
            fail(("initial", "h"), "initial position puts the body outside the cavity")
        delta = stop_distance(shape, omega)
        if gap <= delta:
            fail(("initial", "h"),
                 f"initial clearance {gap:.4g} is below the stop distance {delta:.4g}")


# ---------------------------------------------------------------------------
# runs


def _write_diagnostics(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(rows[0])
        for r in rows[1:]:
            w.writerow([v if isinstance(v, int) else repr(float(v)) for v in r])


def _diag_rows(traj, mod, lead: list | None = None) -> list:
    lead = lead or []
    return [lead + [t, e, c, *m]
            for t, e, c, m in zip(traj.times, traj.energy, traj.clearance, mod)]


def _xi(shape: BodyShape) -> np.ndarray:
    return np.asarray(conformal_center(shape)[0], float)


def simulate(sc: Scenario):
    shape = sc.shape()
    s0 = sc.state0()
    if sc.regime == "unbounded":
        traj = simulate_unbounded(inertia_model(shape), s0, sc.gamma, sc.T, sc.tol, sc.frame,
                                  n_out=sc.n_out)
    elif sc.regime == "bounded":
        traj = simulate_bounded(sc.omega(), shape, s0, sc.gamma, sc.T, sc.tol, n_out=sc.n_out)
    else:
        traj = simulate_vortical(shape, s0, sc.vortex_cloud(), sc.T, sc.tol, n_out=sc.n_out)
    mod = modulated_diagnostics(traj, sc.regime, 1.0, sc.gamma, sc.omega(), _xi(shape))
    out = Path(sc.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(sc.out_path("trajectory"))
    if sc.regime == "vortical":
        traj.cloud_to_csv(sc.out_path("cloud"))
    _write_diagnostics(sc.out_path("diagnostics"), [DIAG_HEADER] + _diag_rows(traj, mod))
    if traj.status != "ok":
        raise CollisionError(f"{traj.status}: {traj.message}", traj)
    return traj


def family(sc: Scenario, threads: int | None = None) -> list:
    if sc.family is None:
        raise ConfigError("family subcommand needs a [family] table")
    f = sc.family
    i = sc.initial
    fam = EpsilonFamily(sc.shape(), tuple(f.epsilons), f.alpha, sc.gamma, tuple(i.l), i.r,
                        tuple(i.h), i.theta, sc.regime, sc.omega(),
                        sc.vortex_cloud() if sc.regime == "vortical" else None, f.drift_start)
    run = run_family(fam, sc.T, sc.tol, f.n_out, threads)
    rows = family_report(run)
    out = Path(sc.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(sc.out_path("family"), "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")
    diag = [["epsilon"] + DIAG_HEADER]
    omega = sc.omega()
    for e in fam.epsilons:
        tr = run.trajectories.get(e)
        if tr is None:
            continue
        xi = _xi(fam.member_shape(e)) if sc.regime == "vortical" else None
        diag += _diag_rows(tr, modulated_diagnostics(tr, sc.regime, e, sc.gamma, omega, xi), [e])
    if len(diag) > 1:
        _write_diagnostics(sc.out_path("diagnostics"), diag)
    if run.errors:
        msg = "; ".join(f"eps={e}: {m}" for e, m in sorted(run.errors.items(), reverse=True))
        failed = [run.trajectories.get(e) for e in run.errors]
        if any(tr is not None and tr.status in ("collision", "overlap") for tr in failed):
            raise CollisionError(msg)
        raise SolverError(msg)
    return rows


def coefficients(sc: Scenario) -> dict:
    shape = sc.shape()
    q = np.array([*sc.initial.h, sc.initial.theta])
    if sc.regime == "bounded":
        d = bounded_coefficients(sc.omega(), shape, q).to_dict()
    else:
        model = inertia_model(shape)
        d = {"q": q.tolist(), "Ma": model.Ma_theta(q[2]).tolist(), "E": [0.0, 0.0, 0.0],
             "B": model.B_theta(q[2]).tolist(), "C": 0.0}
    out = Path(sc.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(sc.out_path("coefficients"), "w") as fh:
        json.dump(d, fh, indent=2)
        fh.write("\n")
    return d


def verify(panels: int, tol: float | None, out: str | None) -> bool:
    reports = run_suite(panels, tol=tol)
    text = reports_to_json(reports)
    print(text)
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / OutputSpec().verify).write_text(text + "\n")
    return all(r.passed for r in reports)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fluidbody",
                                 description="Rigid body in a planar perfect fluid.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "integrate one scenario"),
                        ("family", "run a shrinking-body family"),
                        ("coefficients", "added mass and Lorentz fields at q(0)"),
                        ("verify", "run the identity check suite")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=name != "verify", help="scenario TOML file")
        p.add_argument("--out", help="output directory (overrides [output].dir)")
        p.add_argument("--tol", type=float, help="integration or check tolerance")
        p.add_argument("--panels", type=int, help="boundary panels per curve")
    return ap


def _exit_code(exc: BaseException) -> int:
    for cls, code in EXIT_CODES.items():
        if isinstance(exc, cls):
            return code
    if isinstance(exc, np.linalg.LinAlgError):  # a ValueError subclass
        return EXIT_CODES[SolverError]
    if isinstance(exc, (ClearanceError, GeometryError, ValueError)):
        return EXIT_CODES[ConfigError]
    return EXIT_CODES[SolverError]


def main(argv: list | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = thread_count()
        if args.command == "verify":
            return 0 if verify(args.panels or 512, args.tol, args.out) else EXIT_VERIFY_FAILED
        sc = parse_scenario(args.config, {"tol": args.tol, "panels": args.panels})
        if args.out is not None:
            sc.output.dir = args.out
        if args.command == "simulate":
            simulate(sc)
        elif args.command == "family":
            print(json.dumps(family(sc, threads), indent=2))
        else:
            print(json.dumps(coefficients(sc), indent=2))
    except (FluidBodyError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"fluidbody: error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
