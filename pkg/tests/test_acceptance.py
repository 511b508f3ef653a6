"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""
import filecmp
import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from tgfield.alpha_profile import FieldParams, solve_alpha
from tgfield.cli import main
from tgfield.frame_field import (UnitField, frame_invariants, profile_lattice, tg_field,
                                 tg_residual)
from tgfield.immersion import immersion_profile, revolve_and_check
from tgfield.sasaki_bundle import (SasakiMetric, induced_curvature, induced_curvature_at,
                                   induced_curvature_fd,
                                   induced_metric, random_tangent_shots, shoot_many,
                                   surface_deviation)
from tgfield.trajectories import (derivative_along, embed_sphere, first_integral, fit_plane,
                                  integrate_trajectory, intrinsic_relation_residual,
                                  polyline_distance, resample_circle,
                                  sphere_trajectory_start, stereographic, xi_k)
from tgfield.warped_metric import Point2, gauss_curvature

A_VALUES = (-1.5, -1.0, -0.75, -0.25, 0.5)
ALPHA0, OMEGA0, SPAN = 1.0, 0.3, (-0.5, 0.5)
TRAJECTORY_RUNS = {
    -0.5: (0.5, 1.2, (-0.25, 8.0)),
    -2.0: (math.pi - 1e-4, 2.0, (-8.0, 0.5)),
    0.0: (math.pi / 4, 1.0, (-0.3, 8.0)),
}


@pytest.fixture
def report(capsys):
    def emit(number, name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}: {detail}")
        assert ok, detail
    return emit


def _profile(a):
    return solve_alpha(FieldParams(a, OMEGA0), 0.0, ALPHA0, SPAN)


def _grid(profile):
    return profile_lattice(profile, 50, 50)


def test_criterion_1_forward_check(report):
    rows, ok = [], True
    for a in A_VALUES:
        t0 = time.perf_counter()
        prof = _profile(a)
        U, V = _grid(prof)
        field = tg_field(prof)
        an = tg_residual(prof.metric(), field, U, V, "analytic").max_abs
        fd = tg_residual(prof.metric(), field, U, V, "fd").max_abs
        dt = time.perf_counter() - t0
        ok &= an <= 1e-7 and fd <= 1e-5 and dt <= 5.0
        rows.append(f"a={a:g} analytic={an:.2e} fd={fd:.2e} {dt:.2f}s")
    report(1, "tg_residual 50x50, analytic <= 1e-7, fd <= 1e-5, <= 5 s", ok, "; ".join(rows))


def test_criterion_2_rigidity(report):
    rows, ok = [], True
    for a in A_VALUES:
        prof = _profile(a)
        U, V = _grid(prof)
        shifted = tg_residual(prof.metric(), UnitField.linear(a + 0.1, OMEGA0), U, V).max_abs
        bumped = tg_residual(prof.metric(), tg_field(prof).plus_sin_v(0.05), U, V).max_abs
        ok &= shifted >= 1e-3 and bumped >= 1e-3
        rows.append(f"a={a:g} (a+0.1)={shifted:.2e} +0.05sin(v)={bumped:.2e}")
    report(2, "perturbed fields >= 1e-3", ok, "; ".join(rows))


def test_criterion_3_sasaki_oracle(report):
    t0 = time.perf_counter()
    a = -0.75
    prof = solve_alpha(FieldParams(a, OMEGA0), 0.0, ALPHA0, (-4.0, 4.0))
    lo, hi = prof.u_interval
    sm = SasakiMetric(prof.metric())
    out = {}
    for name, field in (("tg", tg_field(prof)), ("perturbed", UnitField.linear(a + 0.1, OMEGA0))):
        starts, w = random_tangent_shots(sm, field, (lo + 1.0, hi - 1.0), (0, 2 * math.pi),
                                         20, seed=20240611)
        paths = shoot_many(sm, starts, w, 1.0, 1e-3)
        devs = [surface_deviation(p, field) for p in paths]
        out[name] = (max(devs), min(devs), sum(p.truncated for p in paths))
    dt = time.perf_counter() - t0
    ok = (out["tg"][0] <= 1e-6 and out["perturbed"][0] >= 1e-3 and dt <= 10.0
          and out["tg"][2] == out["perturbed"][2] == 0)
    report(3, "20 seeded bundle geodesics", ok,
           f"TG max deviation {out['tg'][0]:.2e}; perturbed max {out['perturbed'][0]:.2e} "
           f"(min over shots {out['perturbed'][1]:.2e}); truncated "
           f"{out['tg'][2]}+{out['perturbed'][2]}; {dt:.2f}s")


def _all_profiles():
    profs = [_profile(a) for a in A_VALUES]
    profs += [solve_alpha(FieldParams(a, w0), 0.0, al0, span)
              for a, (w0, al0, span) in TRAJECTORY_RUNS.items()]
    return profs


def test_criterion_4_curvature_identities(report):
    worst_k = worst_c = 0.0
    for prof in _all_profiles():
        u = prof.samples[1:-1, 0]
        K = gauss_curvature(prof.metric(), u)
        worst_k = max(worst_k, float(np.max(np.abs(prof.dalpha(u) - K))))
        conserved = np.cos(prof.alpha(u)) * (1 - K) - (prof.params.a + 1)
        worst_c = max(worst_c, float(np.max(np.abs(conserved))))
    ok = worst_k <= 1e-7 and worst_c <= 1e-8
    report(4, "alpha' = K and cos(alpha)(1-K) = a+1", ok,
           f"max|alpha'-K| {worst_k:.2e}; max|cos(alpha)(1-K)-(a+1)| {worst_c:.2e}")


def test_criterion_5_induced_geometry(report):
    worst_g = worst_k = 0.0
    for a in A_VALUES:
        prof = _profile(a)
        lo, hi = prof.u_interval
        u = np.linspace(lo, hi, 41)[2:-2]
        g = induced_metric(SasakiMetric(prof.metric()), tg_field(prof), Point2(u, 0.6))
        target = np.zeros_like(g)
        target[:, 0, 0] = 1
        target[:, 1, 1] = 4 * np.sin(prof.alpha(u) / 2) ** 2
        worst_g = max(worst_g, float(np.max(np.abs(g - target))))
        # curvature of du^2 + r^2 dv^2 by differences in alpha, with d/du = K d/dalpha
        fd = induced_curvature_fd(a, prof.alpha(u))
        worst_k = max(worst_k, float(np.max(np.abs(induced_curvature(prof, u) - fd))))
    sphere = float(np.max(np.abs(induced_curvature_at(-1.0, np.linspace(0.1, 3.0, 50)) - 0.25)))
    ok = worst_g <= 1e-8 and worst_k <= 1e-4 and sphere <= 1e-10
    report(5, "induced metric and curvature of xi(M)", ok,
           f"metric {worst_g:.2e}; curvature vs fd {worst_k:.2e}; a=-1 |K-1/4| {sphere:.2e}")


def test_criterion_6_first_integrals(report):
    rows, ok = [], True
    for a, (w0, al0, span) in TRAJECTORY_RUNS.items():
        params = FieldParams(a, w0)
        prof = solve_alpha(params, 0.0, al0, span)
        tr = integrate_trajectory(prof, params, Point2(0.0, 0.0), 5.0)
        c = first_integral(prof, params, tr.points).value
        drift = float(np.max(np.abs(c - c[0])) / abs(c[0]))
        inv = frame_invariants(prof.metric(), UnitField.linear(a, w0), tr.points)
        intr = float(np.max(intrinsic_relation_residual(inv, c[0], params, tr.v)))
        dk = derivative_along(tr.s, inv.k)
        xk = float(np.nanmax(np.abs(xi_k(prof, params, tr.points) - dk)))
        ok &= (not tr.truncated) and drift <= 1e-6 and intr <= 1e-6 and xk <= 1e-5
        rows.append(f"a={a:g} drift={drift:.2e} intrinsic={intr:.2e} xi(k)={xk:.2e}"
                    f"{' TRUNCATED' if tr.truncated else ''}")
    report(6, "first integrals over arc length 5", ok, "; ".join(rows))


def test_criterion_7_sphere_picture(report):
    params = FieldParams(-1.0, math.pi)
    prof = solve_alpha(params, math.pi / 2, math.pi / 2, (0.01, math.pi - 0.01))
    plane = pole = circle = stereo = 0.0
    truncated = 0
    for c in (-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0):
        start, length = sphere_trajectory_start(c)
        tr = integrate_trajectory(prof, params, start, length)
        truncated += tr.truncated
        xyz = embed_sphere(tr.u, tr.v)
        n, d, res = fit_plane(xyz)
        plane = max(plane, res)
        pole = max(pole, abs(-n[2] - d))
        circle = max(circle, float(np.max(polyline_distance(
            xyz, resample_circle(c, tr.v.min(), tr.v.max())))))
        rho, phi = stereographic(tr.points)
        stereo = max(stereo, float(np.max(np.abs(rho * np.sin(phi) - c))))
    ok = plane <= 1e-6 and pole <= 1e-6 and circle <= 1e-6 and stereo <= 1e-7 and not truncated
    report(7, "a = -1 circles through the south pole", ok,
           f"planarity {plane:.2e}; south pole {pole:.2e}; circle match {circle:.2e}; "
           f"rho sin(phi) - c {stereo:.2e}")


def test_criterion_8_immersion(report, tmp_path, capsys):
    chk = revolve_and_check(immersion_profile(-0.5, 1.2, 1.8, n=200), 64)
    code = main(["immerse", "--a", "0.5", "--output-dir", str(tmp_path)])
    err = capsys.readouterr().err
    ok = chk.metric_residual <= 1e-6 and chk.curvature_residual <= 1e-4 and code == 2
    report(8, "surface of revolution for a = -0.5, none for a = 0.5", ok,
           f"metric {chk.metric_residual:.2e}; curvature {chk.curvature_residual:.2e} "
           f"on {chk.curvature_checked} samples; a=0.5 exit {code} ({err.strip()})")


DETERMINISM_RUNS = [
    ["solve-alpha", "--a", "-0.75"],
    ["verify-tg", "--a", "-0.75"],
    ["shoot", "--a", "-0.75", "--u-min", "-4", "--u-max", "4", "--seed", "99"],
    ["trace", "--a", "-0.5", "--omega0", "0.5", "--alpha0", "1.2", "--u-min", "-0.25",
     "--u-max", "8", "--length", "5"],
    ["sphere-demo"],
    ["immerse", "--a", "-0.5"],
]


def _run_into(capsys, argv, out_dir):
    code = main(argv + ["--output-dir", str(out_dir)])
    summary = json.loads(capsys.readouterr().out)
    summary["files"] = [os.path.relpath(f, out_dir) for f in summary["files"]]
    return code, summary


def test_criterion_9_determinism(report, tmp_path, capsys):
    mismatches = []
    n_files = 0
    for argv in DETERMINISM_RUNS:
        d1, d2 = tmp_path / f"{argv[0]}-1", tmp_path / f"{argv[0]}-2"
        r1, r2 = _run_into(capsys, argv, d1), _run_into(capsys, argv, d2)
        if r1 != r2:
            mismatches.append(f"{argv[0]} summary")
        for name in r1[1]["files"]:
            n_files += 1
            if not filecmp.cmp(d1 / name, d2 / name, shallow=False):
                mismatches.append(f"{argv[0]}/{name}")
    # the randomized command once more in a fresh interpreter
    d3 = tmp_path / "shoot-subprocess"
    argv = DETERMINISM_RUNS[2]
    subprocess.run([sys.executable, "-m", "tgfield.cli", *argv, "--output-dir", str(d3)],
                   check=True, capture_output=True)
    if not filecmp.cmp(tmp_path / "shoot-1" / "shots.csv", d3 / "shots.csv", shallow=False):
        mismatches.append("shoot/shots.csv (subprocess)")
    report(9, "byte-identical repeated runs", not mismatches,
           f"{n_files} files over {len(DETERMINISM_RUNS)} commands plus a subprocess rerun; "
           f"mismatches: {mismatches or 'none'}")
