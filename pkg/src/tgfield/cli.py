"""Command-line runs that emit CSV/OBJ artifacts and a one-line JSON summary.

Every residual in the summary is the maximum of a residual column in one of
the emitted CSV files, so it can be recomputed from the files exactly.

Exit codes: 0 success, 2 validation or non-existence, 3 truncation before
the requested span, 4 internal numeric failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import alpha_profile as ap
from .alpha_profile import FieldParams, solve_alpha
from .errors import (BranchError, DegenerateFieldError, DomainError, NonExistenceError,
                     ParameterizationError, TGFieldError, ValidationError)
from .frame_field import (UnitField, frame_invariants, profile_lattice,
                          second_fundamental_form, tg_field)
from .immersion import immersion_profile, revolve_and_check
from .sasaki_bundle import SasakiMetric, random_tangent_shots, shoot_many
from .trajectories import (derivative_along, embed_sphere, first_integral, fit_plane,
                           integrate_trajectory, intrinsic_relation_residual,
                           polyline_distance, resample_circle, sphere_trajectory_start,
                           stereographic, write_columns, xi_k)
from .warped_metric import Point2

COMMANDS = ("solve-alpha", "verify-tg", "shoot", "trace", "sphere-demo", "immerse")
PERTURBATIONS = ("none", "a", "sin")
SPHERE_CS = (-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0)
DEFAULT_OUTPUT_DIR = "tgfield-out"

EXIT_OK, EXIT_INVALID, EXIT_TRUNCATED, EXIT_NUMERIC = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    a: float = -0.5
    omega0: float = 0.0
    u0: float = 0.0
    alpha0: float = 1.0
    u_min: float = -0.5
    u_max: float = 0.5
    tol: float = 1e-10
    n_u: int = 50
    n_v: int = 50
    perturb: str = "none"
    shots: int = 20
    length: float = 1.0
    step: float = 1e-3
    seed: int = 0
    start_u: Optional[float] = None
    start_v: float = 0.0
    alpha_lo: float = 1.2
    alpha_hi: float = 1.8
    n: int = 200
    output_dir: str = DEFAULT_OUTPUT_DIR

    @property
    def params(self) -> FieldParams:
        return FieldParams(self.a, self.omega0)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValidationError(f"command: unknown command {self.command!r}")
        for key in ("tol", "step", "length"):
            if not getattr(self, key) > 0:
                raise ValidationError(f"{key}: must be > 0, got {getattr(self, key)!r}")
        for key, lo in (("n_u", 1), ("n_v", 3), ("shots", 1), ("n", 2)):
            if getattr(self, key) < lo:
                raise ValidationError(f"{key}: must be >= {lo}, got {getattr(self, key)!r}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed: must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.perturb not in PERTURBATIONS:
            raise ValidationError(f"perturb: expected one of {PERTURBATIONS}, got {self.perturb!r}")
        if not self.u_min < self.u_max:
            raise ValidationError("u_min: must be < u_max")


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_TYPES = {"a": float, "omega0": float, "u0": float, "alpha0": float, "u_min": float,
          "u_max": float, "tol": float, "n_u": int, "n_v": int, "perturb": str,
          "shots": int, "length": float, "step": float, "seed": int,
          "start_u": float, "start_v": float, "alpha_lo": float, "alpha_hi": float,
          "n": int, "output_dir": str, "command": str}


def _coerce(key: str, value):
    kind = _TYPES[key]
    if value is None and key == "start_u":
        return None
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ValidationError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ValidationError(f"{key}: expected a string, got {value!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tgfield", allow_abbrev=False,
        description="Totally geodesic unit vector fields on surfaces: profiles, "
                    "checks, trajectories and immersions.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON file with run settings; flags override it")
    parser.add_argument("--output-dir", dest="output_dir", default=argparse.SUPPRESS)
    for key, kind in _TYPES.items():
        if key in ("command", "output_dir"):
            continue
        flag = "--" + key.replace("_", "-")
        if kind is str:
            parser.add_argument(flag, dest=key, default=argparse.SUPPRESS,
                                choices=PERTURBATIONS if key == "perturb" else None)
        else:
            parser.add_argument(flag, dest=key, type=kind, default=argparse.SUPPRESS)
    return parser


def parse_config(argv=None, env=None) -> RunConfig:
    """Merge defaults, the JSON config file, and flags (in increasing priority).

    The output directory falls back to $TGFIELD_OUTPUT_DIR before the
    built-in default.  Raises ValidationError naming the offending key.
    """
    env = os.environ if env is None else env
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    path = ns.pop("config", None)
    values: dict = {}
    if "TGFIELD_OUTPUT_DIR" in env:
        values["output_dir"] = env["TGFIELD_OUTPUT_DIR"]
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"config: cannot read {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("config: top level must be a JSON object")
        for key, value in data.items():
            if key not in _FIELDS:
                raise ValidationError(f"{key}: unknown configuration key")
            values[key] = _coerce(key, value)
    values.update(ns)
    values["command"] = command
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# -- pipelines ---------------------------------------------------------------

class _Run:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.summary: dict = {"command": cfg.command}
        self.truncated = False

    def path(self, name: str) -> Path:
        p = self.out / name
        self.files.append(str(p))
        return p

    def profile(self, span_required: bool):
        """Solve the profile; a cut-short u-span fails the run only if required."""
        cfg = self.cfg
        prof = solve_alpha(cfg.params, cfg.u0, cfg.alpha0, (cfg.u_min, cfg.u_max), cfg.tol)
        if span_required:
            self.truncated |= prof.truncated
        self.summary["u_interval"] = list(prof.u_interval)
        self.summary["profile_truncated"] = prof.truncated
        return prof

    def field(self, prof) -> UnitField:
        p = self.cfg.perturb
        if p == "a":
            return UnitField.linear(self.cfg.a + 0.1, self.cfg.omega0)
        if p == "sin":
            return tg_field(prof).plus_sin_v(0.05)
        return tg_field(prof)


def _max(col) -> float:
    col = np.asarray(col, float)
    col = col[~np.isnan(col)]
    return float(np.max(col)) if col.size else None


def _solve_alpha(run: _Run) -> None:
    prof = run.profile(span_required=True)
    u, al, dal = prof.samples.T
    lo, hi = ap._inner(prof.u_interval)
    K = prof.gauss_curvature(np.clip(u, lo, hi))
    ca = np.cos(al)
    cols = {"u": u, "alpha": al, "alpha_prime": dal, "K": K, "cos_alpha": ca,
            "curvature_residual": np.abs(dal - K),
            "conserved_residual": np.abs(ca * (1.0 - K) - (run.cfg.a + 1.0))}
    write_columns(run.path("profile.csv"), cols)
    run.summary["curvature_residual"] = _max(cols["curvature_residual"])
    run.summary["conserved_residual"] = _max(cols["conserved_residual"])
    run.summary["stop_reasons"] = list(prof.stop_reasons)


def _verify_tg(run: _Run) -> None:
    cfg = run.cfg
    prof = run.profile(span_required=True)
    metric, field = prof.metric(), run.field(prof)
    u_vals, v_vals = profile_lattice(prof, cfg.n_u, cfg.n_v)
    U, V = np.meshgrid(u_vals, v_vals, indexing="ij")
    p = Point2(U.ravel(), V.ravel())
    analytic = second_fundamental_form(metric, field, p, "analytic").max_abs
    fd = second_fundamental_form(metric, field, p, "fd").max_abs
    write_columns(run.path("tg_residual.csv"),
                  {"u": p.u, "v": p.v, "analytic": analytic, "fd": fd})
    run.summary["max_abs"] = _max(analytic)
    run.summary["max_abs_fd"] = _max(fd)
    run.summary["grid"] = [cfg.n_u, cfg.n_v]


def _shoot(run: _Run) -> None:
    cfg = run.cfg
    prof = run.profile(span_required=False)
    field = run.field(prof)
    sm = SasakiMetric(prof.metric())
    lo, hi = prof.u_interval
    pad = min(cfg.length, 0.25 * (hi - lo))
    starts, w = random_tangent_shots(sm, field, (lo + pad, hi - pad),
                                     (0.0, 2.0 * math.pi), cfg.shots, cfg.seed)
    paths = shoot_many(sm, starts, w, cfg.length, cfg.step)
    cols = {k: [] for k in ("shot", "t", "u", "v", "theta", "deviation")}
    for j, path in enumerate(paths):
        dev = np.abs(path.theta - field.theta(path.u, path.v))
        for k, x in zip(cols, (np.full(len(path.t), j), path.t, path.u, path.v,
                               path.theta, dev)):
            cols[k].append(x)
    cols = {k: np.concatenate(x) for k, x in cols.items()}
    write_columns(run.path("shots.csv"), cols)
    per_shot = [_max(cols["deviation"][cols["shot"] == j]) for j in range(len(paths))]
    n_trunc = sum(p.truncated for p in paths)
    run.truncated |= n_trunc > 0
    run.summary.update(surface_deviation=_max(cols["deviation"]),
                       min_shot_deviation=min(per_shot), truncated_shots=n_trunc,
                       shots=len(paths))


def _trace_columns(prof, params: FieldParams, traj) -> dict:
    p = traj.points
    inv = frame_invariants(prof.metric(), UnitField.linear(params.a, params.omega0), p)
    c = first_integral(prof, params, p).value
    c0 = c[0]
    kdot = derivative_along(traj.s, inv.k)
    return {"s": traj.s, "u": traj.u, "v": traj.v, "alpha": traj.alpha(),
            "k": inv.k, "kappa": inv.kappa, "first_integral": c,
            "drift": np.abs(c - c0) / max(abs(c0), 1e-300),
            "intrinsic_residual": intrinsic_relation_residual(inv, c0, params, p.v),
            "xi_k_residual": np.abs(xi_k(prof, params, p) - kdot)}


def _trace(run: _Run) -> None:
    cfg = run.cfg
    prof = run.profile(span_required=False)
    start = Point2(cfg.u0 if cfg.start_u is None else cfg.start_u, cfg.start_v)
    traj = integrate_trajectory(prof, cfg.params, start, cfg.length, cfg.step)
    run.truncated |= traj.truncated
    cols = _trace_columns(prof, cfg.params, traj)
    write_columns(run.path("trajectory.csv"), cols)
    run.summary.update(first_integral=float(cols["first_integral"][0]),
                       drift=_max(cols["drift"]),
                       intrinsic_residual=_max(cols["intrinsic_residual"]),
                       xi_k_residual=_max(cols["xi_k_residual"]),
                       arc_length=float(traj.s[-1]), trajectory_truncated=traj.truncated)


def _sphere_demo(run: _Run) -> None:
    cfg = run.cfg
    params = FieldParams(-1.0, math.pi)
    prof = solve_alpha(params, math.pi / 2, math.pi / 2, (0.01, math.pi - 0.01), cfg.tol)
    run.truncated |= prof.truncated
    worst = dict(planarity=0.0, south_pole=0.0, stereographic=0.0, circle=0.0,
                 first_integral=0.0)
    for c in SPHERE_CS:
        start, length = sphere_trajectory_start(c)
        traj = integrate_trajectory(prof, params, start, length, cfg.step)
        run.truncated |= traj.truncated
        xyz = embed_sphere(traj.u, traj.v)
        n, d, plane = fit_plane(xyz)
        rho, phi = stereographic(traj.points)
        fi = first_integral(prof, params, traj.points).value
        poly = resample_circle(c, float(np.min(traj.v)), float(np.max(traj.v)))
        cols = {"s": traj.s, "u": traj.u, "v": traj.v, "x": xyz[:, 0], "y": xyz[:, 1],
                "z": xyz[:, 2], "rho": rho, "phi": phi,
                "plane_residual": np.abs(xyz @ n - d),
                "south_pole_residual": np.full(len(traj.s), abs(-n[2] - d)),
                "stereographic_residual": np.abs(rho * np.sin(phi) - c),
                "circle_distance": polyline_distance(xyz, poly),
                "first_integral_residual": np.abs(fi - c)}
        tag = format(c, "+g")
        write_columns(run.path(f"sphere_c{tag}.csv"), cols)
        write_columns(run.path(f"circle_c{tag}.csv"),
                      {"x": poly[:, 0], "y": poly[:, 1], "z": poly[:, 2]})
        for key, col in (("planarity", "plane_residual"), ("south_pole", "south_pole_residual"),
                         ("stereographic", "stereographic_residual"),
                         ("circle", "circle_distance"),
                         ("first_integral", "first_integral_residual")):
            worst[key] = max(worst[key], _max(cols[col]))
    run.summary.update(worst)
    run.summary["c_values"] = list(SPHERE_CS)


def _immerse(run: _Run) -> None:
    cfg = run.cfg
    prof = immersion_profile(cfg.a, cfg.alpha_lo, cfg.alpha_hi, cfg.n, cfg.tol)
    chk = revolve_and_check(prof, cfg.n_v)
    prof.to_csv(run.path("revolution_profile.csv"))
    chk.to_obj(run.path("surface.obj"))
    chk.to_csv(run.path("immersion_residual.csv"))
    run.summary.update(metric_residual=chk.metric_residual,
                       curvature_residual=chk.curvature_residual,
                       curvature_samples=chk.curvature_checked)


PIPELINES = {"solve-alpha": _solve_alpha, "verify-tg": _verify_tg, "shoot": _shoot,
             "trace": _trace, "sphere-demo": _sphere_demo, "immerse": _immerse}

# errors caused by the requested configuration rather than by the numerics
_INVALID = (ValidationError, DomainError, NonExistenceError, DegenerateFieldError,
            BranchError, ParameterizationError)


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute one pipeline; print the JSON summary; return the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    r = _Run(cfg)
    with np.errstate(all="ignore"):
        PIPELINES[cfg.command](r)
    r.summary["truncated"] = bool(r.truncated)
    r.summary["files"] = r.files
    print(json.dumps(r.summary, allow_nan=False), file=stdout)
    return EXIT_TRUNCATED if r.truncated else EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ValidationError as exc:
        print(f"tgfield: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return run(cfg)
    except NonExistenceError as exc:
        print(f"tgfield: no immersion: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _INVALID as exc:
        print(f"tgfield: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (TGFieldError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"tgfield: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
