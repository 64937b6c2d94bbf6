"""Acceptance suite: ten checks, each printing one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
printed to the terminal even when output capture is on.
"""

import json
import os
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from oracles import catenoid_area, catenoid_necks, douglas_brute_force, moebius_through, trig_trace
from plateau import douglas as dg
from plateau.annulus import solve_two_contours
from plateau.contour import builtin_contour
from plateau.diagnostics import certify
from plateau.exceptions import ModulusAtBracketEnd, ValidationError
from plateau.harmonic import FourierBoundary, HarmonicDisc, PolarGrid, dirichlet_energy, find_branch_points
from plateau.solver import SolverConfig, riemann_map, solve_plateau

# residuals at or below this are roundoff; halving is not meaningful there
EL_FLOOR = 1e-10


def verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def quiet_solve(c, **cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return solve_plateau(c, SolverConfig(**cfg))


CORPUS = {
    "circle": ("circle", {}, 2),
    "tilted_circle": ("tilted_circle", {}, 3),
    "ellipse": ("ellipse", {"a": 2.0, "b": 1.0}, 2),
}


@pytest.fixture(scope="module")
def corpus_solutions():
    out = {}
    for name, (kind, params, dim) in CORPUS.items():
        c = builtin_contour(kind, params, dim)
        for n in (256, 512):
            out[name, n] = quiet_solve(c, n_nodes=n)
    return out


def test_criterion_01_circle_identity(capsys):
    n = 256
    start = time.perf_counter()
    c = builtin_contour("circle", {}, 2)
    value = dg.douglas_energy(c, dg.Reparameterization.uniform(n))
    elapsed = time.perf_counter() - start
    th = 2 * np.pi * np.arange(n) / n
    oracle = douglas_brute_force(np.c_[np.cos(th), np.sin(th)], np.c_[-np.sin(th), np.cos(th)])
    ok = abs(value - np.pi) < 1e-6 and abs(oracle - np.pi) < 1e-6 and elapsed < 1.0
    verdict(capsys, 1, ok, f"A={value:.15f} oracle={oracle:.15f} |A-pi|={abs(value - np.pi):.2e} "
                           f"t={elapsed:.3f}s")


def test_criterion_02_energy_identity(capsys):
    rng = np.random.default_rng(2)
    n = 256
    th = 2 * np.pi * np.arange(n) / n
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        deg = int(rng.integers(1, 9))
        dim = int(rng.integers(2, 4))
        a, b = rng.standard_normal((deg, dim)), rng.standard_normal((deg, dim))
        g = trig_trace(a, b, th)
        A = dg.douglas_energy(g, dg.Reparameterization.uniform(n))
        D = dirichlet_energy(HarmonicDisc.from_trace(g))
        worst = max(worst, abs(A - D) / D)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 10.0
    verdict(capsys, 2, ok, f"max relative |A-D|/D={worst:.2e} over 50 traces t={elapsed:.2f}s")


def test_criterion_03_euler_lagrange(capsys, corpus_solutions):
    lines, ok = [], True
    for name in CORPUS:
        r1 = corpus_solutions[name, 256].report
        r2 = corpus_solutions[name, 512].report
        e1, e2 = r1.el_residual_max, r2.el_residual_max
        small = e1 < 1e-3 and e2 < 1e-3
        if e1 <= EL_FLOOR and e2 <= EL_FLOOR:
            halves, ratio = True, float("nan")
        else:
            ratio = e2 / e1
            halves = 0.375 <= ratio <= 0.625
        p1 = r1.extra["el_residual_punctured_max"]
        p2 = r2.extra["el_residual_punctured_max"]
        ok &= small and halves and r1.converged and r2.converged
        lines.append(f"{name}: max|r| {e1:.2e} -> {e2:.2e} ratio {ratio:.3f} "
                     f"(punctured {p1:.2e} -> {p2:.2e} ratio {p2 / max(p1, 1e-300):.3f})")
    verdict(capsys, 3, ok, "; ".join(lines))


def test_criterion_04_gradient(capsys):
    rng = np.random.default_rng(4)
    worst = 0.0
    for trial in range(20):
        deg, dim, n = 3, 2 + trial % 2, 40
        c = None
        while c is None:
            a = rng.standard_normal((deg, dim)) / np.arange(1, deg + 1)[:, None] ** 2
            b = rng.standard_normal((deg, dim)) / np.arange(1, deg + 1)[:, None] ** 2
            a[0, 0] += 2.0
            b[0, 1] += 2.0
            try:
                c = builtin_contour("fourier_curve", {"a": a.tolist(), "b": b.tolist()}, dim,
                                    samples=512)
            except ValidationError:  # self-intersecting planar draw
                c = None
        s = 2 * np.pi * np.arange(n) / n
        x = sum(0.3 / k * (rng.standard_normal() * np.cos(k * s) + rng.standard_normal() * np.sin(k * s))
                for k in range(1, 5))
        phi = dg.Reparameterization.uniform(n).with_log_increments(x)
        g = dg.douglas_gradient(c, phi)
        fd = np.zeros(n)
        eps = 1e-6
        for j in range(n):
            if j in phi.anchors:
                continue
            up, dn = phi.angles.copy(), phi.angles.copy()
            up[j] += eps
            dn[j] -= eps
            fd[j] = (dg.douglas_energy(c, dg.Reparameterization(up, phi.anchors, phi.anchor_angles))
                     - dg.douglas_energy(c, dg.Reparameterization(dn, phi.anchors,
                                                                  phi.anchor_angles))) / (2 * eps)
        worst = max(worst, np.linalg.norm(g - fd) / np.linalg.norm(fd))
    verdict(capsys, 4, worst < 1e-5, f"max relative |g - fd| over 20 pairs {worst:.2e}")


def test_criterion_05_planar_solves(capsys):
    t0 = time.perf_counter()
    ell = quiet_solve(builtin_contour("ellipse", {"a": 2.0, "b": 1.0}, 2), n_nodes=256).report
    t1 = time.perf_counter()
    tilt = quiet_solve(builtin_contour("tilted_circle", {}, 3), n_nodes=256).report
    t2 = time.perf_counter()
    ok = (ell.converged and abs(ell.area - 2 * np.pi) < 1e-2 and ell.f_defect < 1e-4
          and ell.eg_defect < 1e-4 and abs(tilt.area - np.pi) < 1e-3
          and t1 - t0 < 60 and t2 - t1 < 60)
    verdict(capsys, 5, ok, f"ellipse area {ell.area:.10f} defects ({ell.f_defect:.1e}, "
                           f"{ell.eg_defect:.1e}) t={t1 - t0:.1f}s; tilted circle area "
                           f"{tilt.area:.10f} t={t2 - t1:.1f}s")


def test_criterion_06_riemann_map(capsys):
    c = builtin_contour("circle", {"radius": 2.0, "center": [1.0, 0.0]}, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sol, uni = riemann_map(c, SolverConfig(n_nodes=256), n_grid=10)
    phi = sol.reparameterization
    n = phi.n_nodes
    w = (c(np.arange(n) / n) @ np.array([1.0, 1j]) - 1.0) / 2.0
    z = np.exp(1j * phi.angles)
    # the disc automorphism through the three anchored pairs
    m = moebius_through(z[phi.anchors], w[phi.anchors])
    sup = float(np.max(np.abs(m(z) - w)))
    winding_ok = set(uni.winding_numbers) == {1}
    ok = uni.univalent and winding_ok and uni.jacobian_min > 0 and sup < 1e-3
    verdict(capsys, 6, ok, f"winding {sorted(set(uni.winding_numbers))} over "
                           f"{len(uni.winding_numbers)} targets, jacobian min "
                           f"{uni.jacobian_min:.3g}, sup |phi - moebius| {sup:.2e}")


def test_criterion_07_energy_area_chain(capsys, corpus_solutions):
    grid = PolarGrid(1024, 64)
    rows, ok = [], True
    for (name, n), sol in corpus_solutions.items():
        _, chain = certify(sol.disc, grid)
        good = chain.dirichlet - chain.area + 1e-8 >= 0 and (chain.gap < 1e-4) == sol.report.converged
        ok &= good and sol.report.converged
        rows.append(f"{name}/{n} gap {chain.gap:.1e}")
    rng = np.random.default_rng(7)
    for k in range(5):
        a = np.vstack([np.zeros(3), rng.standard_normal((4, 3))])
        b = np.vstack([np.zeros(3), rng.standard_normal((4, 3))])
        _, chain = certify(HarmonicDisc(FourierBoundary(a, b)), grid)
        ok &= chain.dirichlet - chain.area + 1e-8 >= 0
    th = 2 * np.pi * np.arange(128) / 128
    _, chain = certify(HarmonicDisc.from_trace(np.c_[2 * np.cos(th), np.sin(th)]), grid)
    ok &= chain.dirichlet - chain.area + 1e-8 >= 0 and chain.gap > 0.1
    rows.append(f"(2u, v) gap {chain.gap:.4f}")
    verdict(capsys, 7, ok, "; ".join(rows))


def test_criterion_08_catenoid(capsys):
    start = time.perf_counter()
    c1 = builtin_contour("circle", {"center": [0, 0, 0.4]}, 3)
    c2 = builtin_contour("circle", {"center": [0, 0, -0.4]}, 3)
    sol = solve_two_contours(c1, c2, SolverConfig(n_nodes=128))
    necks = catenoid_necks(0.4)
    oracle = catenoid_area(0.4, max(necks))
    rel = abs(sol.report.area - oracle) / oracle
    far1 = builtin_contour("circle", {"center": [0, 0, 0.8]}, 3)
    far2 = builtin_contour("circle", {"center": [0, 0, -0.8]}, 3)
    roots_far = catenoid_necks(0.8)
    try:
        solve_two_contours(far1, far2, SolverConfig(n_nodes=128))
        degenerate = False
    except ModulusAtBracketEnd:
        degenerate = True
    elapsed = time.perf_counter() - start
    ok = len(necks) == 2 and rel < 1e-2 and degenerate == (len(roots_far) == 0) and elapsed < 300
    verdict(capsys, 8, ok, f"H=0.4 area {sol.report.area:.8f} oracle {oracle:.8f} rel {rel:.1e} "
                           f"rho {sol.modulus:.5f}; H=0.8 oracle roots {len(roots_far)} "
                           f"bracket-end {degenerate}; t={elapsed:.1f}s")


def test_criterion_09_branch_points(capsys):
    th = 2 * np.pi * np.arange(128) / 128
    square = HarmonicDisc.from_trace(np.c_[np.cos(2 * th), np.sin(2 * th)])
    identity = HarmonicDisc.from_trace(np.c_[np.cos(th), np.sin(th)])
    n_grid, radius = 81, 0.95
    cell = 2 * radius / (n_grid - 1)
    found = find_branch_points(square, n_grid=n_grid, radius=radius)
    none = find_branch_points(identity, n_grid=n_grid, radius=radius)
    ok = len(found) == 1 and np.hypot(found[0].u, found[0].v) <= cell and none == []
    where = f"({found[0].u:.1e}, {found[0].v:.1e})" if found else "-"
    verdict(capsys, 9, ok, f"z^2: {len(found)} point(s) at {where} (cell {cell:.3f}); "
                           f"identity: {len(none)}")


def test_criterion_10_determinism(capsys, tmp_path):
    spec = tmp_path / "ellipse.json"
    spec.write_text(json.dumps({"dimension": 2, "builtin": "ellipse",
                                "params": {"a": 2.0, "b": 1.0}}))
    blobs, codes = [], []
    for threads in ("1", "4"):
        out = tmp_path / f"threads{threads}"
        r = subprocess.run([sys.executable, "-m", "plateau.cli", "--threads", threads, "solve",
                            "--contour", str(spec), "--out", str(out)],
                           capture_output=True, text=True, env=dict(os.environ))
        codes.append(r.returncode)
        blobs.append((out / "report.json").read_bytes() if (out / "report.json").exists() else b"")
    ok = codes == [0, 0] and blobs[0] == blobs[1] and blobs[0] != b""
    verdict(capsys, 10, ok, f"exit codes {codes}, report.json identical: {blobs[0] == blobs[1]} "
                            f"({len(blobs[0])} bytes)")
