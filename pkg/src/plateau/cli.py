"""``plateau`` command line: solve, map2d, annulus, check."""

import argparse
import logging
import os
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import douglas as dg
from .annulus import solve_two_contours, write_annulus_obj
from .contour import read_contour_spec
from .exceptions import (ModulusAtBracketEnd, NotConverged, ParseError, PlateauError,
                         UnivalencyFailure, ValidationError)
from .harmonic import write_obj
from .io import read_boundary, read_json, write_boundary, write_csv, write_history, write_json
from .solver import SolverConfig, assemble_disc, build_report, solve_plateau, univalency_check

logger = logging.getLogger("plateau")

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2
EXIT_UNIVALENCY, EXIT_BRACKET, EXIT_CHECK = 3, 4, 5

# CLI flag -> SolverConfig field
_FLAG_FIELDS = {
    "nodes": "n_nodes", "grad_tol": "grad_tol", "restarts": "restarts", "max_iters": "max_iters",
    "max_degree": "max_degree", "seed": "seed", "defect_tol": "defect_tol",
}


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("PLATEAU_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"PLATEAU_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def resolve_config(args, block=None):
    """Defaults, overridden by the spec file's config block, overridden by flags."""
    d = SolverConfig().to_dict()
    d.update(block or {})
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            d[name] = value
    bracket = getattr(args, "modulus_bracket", None)
    if bracket is not None:
        d["modulus_bracket"] = bracket
    return SolverConfig.from_dict(d)


def _bracket(text):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'a,b'") from None
    return (lo, hi)


def _grid(text):
    parts = text.lower().split("x")
    try:
        sizes = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'GxG'") from None
    if len(sizes) != 2 or sizes[0] != sizes[1] or sizes[0] < 1:
        raise argparse.ArgumentTypeError("expected a square grid 'GxG'")
    return sizes[0]


class _Run:
    """Collects written files and writes the manifest last."""

    def __init__(self, out, inputs, cfg, threads):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.inputs = [str(p) for p in inputs]
        self.cfg = cfg
        self.threads = threads
        self.files = []
        self.start = time.perf_counter()

    def add(self, paths):
        self.files += [Path(p).name for p in (paths if isinstance(paths, list) else [paths])]

    def manifest(self, iterations, status):
        path = self.out / "manifest.json"
        self.files.append(path.name)
        write_json({
            "inputs": self.inputs,
            "config": self.cfg.to_dict(),
            "output_dir": str(self.out),
            "tool_version": _version(),
            "threads": self.threads,
            "wall_clock_seconds": time.perf_counter() - self.start,
            "iterations": iterations,
            "status": status,
            "files": self.files,
        }, path)


def _write_solution(run, sol):
    rep = sol.report
    run.add(write_obj(sol.disc, run.out / "surface.obj"))
    run.add(write_json(rep.to_dict(), run.out / "report.json"))
    run.add(write_history(rep.history, run.out / "history.csv"))
    run.add(write_boundary(sol.contour, sol.reparameterization, run.out / "boundary.csv"))


def _solve(args, cfg):
    try:
        return solve_plateau(args._contour, cfg, strict=True), EXIT_OK
    except NotConverged as exc:
        print(f"plateau: {exc}", file=sys.stderr)
        return exc.result, EXIT_NOT_CONVERGED


def cmd_solve(args):
    contour, block = read_contour_spec(args.contour)
    cfg = resolve_config(args, block)
    args._contour = contour
    run = _Run(args.out, [args.contour], cfg, args._threads)
    sol, code = _solve(args, cfg)
    _write_solution(run, sol)
    run.manifest(sol.report.iterations, "converged" if code == EXIT_OK else "not_converged")
    return code


def cmd_map2d(args):
    contour, block = read_contour_spec(args.contour)
    if contour.dimension != 2:
        raise ValidationError("map2d needs a planar (dimension 2) contour")
    cfg = resolve_config(args, block)
    args._contour = contour
    run = _Run(args.out, [args.contour], cfg, args._threads)
    sol, code = _solve(args, cfg)
    _write_solution(run, sol)
    uni = univalency_check(sol.disc, contour, n_grid=args.grid)
    run.add(write_json(uni.to_dict(), run.out / "univalency.json"))
    # preimage / image pairs on a polar grid for plotting
    rho = np.arange(1, 21) / 21.0
    theta = 2.0 * np.pi * np.arange(64) / 64
    z = np.concatenate([[0.0], np.outer(rho, np.exp(1j * theta)).ravel()])
    img = sol.disc.values(z)
    rows = [(float(p.real), float(p.imag), float(q[0]), float(q[1])) for p, q in zip(z, img)]
    run.add(write_csv(run.out / "image_grid.csv", ["u", "v", "x", "y"], rows))
    if not uni.univalent:
        print(f"plateau: univalency check failed at {len(uni.offending)} targets "
              f"(jacobian min {uni.jacobian_min:.3g})", file=sys.stderr)
        code = EXIT_UNIVALENCY
    run.manifest(sol.report.iterations, "univalency_failure" if code == EXIT_UNIVALENCY else
                 ("converged" if code == EXIT_OK else "not_converged"))
    return code


def cmd_annulus(args):
    c1, block1 = read_contour_spec(args.contour1)
    c2, block2 = read_contour_spec(args.contour2)
    block = dict(block1)
    block.update(block2)
    cfg = resolve_config(args, block)
    run = _Run(args.out, [args.contour1, args.contour2], cfg, args._threads)
    code, status = EXIT_OK, "converged"
    try:
        sol = solve_two_contours(c1, c2, cfg, strict=True)
    except ModulusAtBracketEnd as exc:
        print(f"plateau: {exc}. Widen --modulus-bracket, or expect two separate discs "
              "if the contours are too far apart.", file=sys.stderr)
        sol, code, status = exc.result, EXIT_BRACKET, "modulus_at_bracket_end"
    except NotConverged as exc:
        print(f"plateau: {exc}", file=sys.stderr)
        sol, code, status = exc.result, EXIT_NOT_CONVERGED, "not_converged"
    run.add(write_annulus_obj(sol.surface, run.out / "annulus.obj"))
    run.add(write_csv(run.out / "modulus_trace.csv", ["rho", "energy"], sol.energy_trace))
    run.add(write_json(sol.report.to_dict(), run.out / "report.json"))
    run.manifest(sol.report.iterations, status)
    return code


_CHECKED = ("douglas_energy", "dirichlet_energy", "dirichlet_quadrature", "area", "gap",
            "f_defect", "eg_defect", "el_residual_max")


def check_report(stored, contour, phi, refine=1):
    """Recompute a stored solve; returns the list of violated invariants."""
    cfg_dict = dict(stored["config"])
    if refine > 1:
        cfg_dict["grid_theta"] = cfg_dict["grid_theta"] * refine
        cfg_dict["grid_rho"] = cfg_dict["grid_rho"] * refine
    cfg = SolverConfig.from_dict(cfg_dict)
    disc = assemble_disc(contour, phi, cfg)
    fresh = build_report(contour, phi, disc, cfg).to_dict()
    tol = stored["tolerances"]
    bounds = {
        "douglas_energy": tol["energy"], "dirichlet_energy": tol["energy"],
        "dirichlet_quadrature": tol["defect"], "area": tol["defect"], "gap": tol["defect"],
        "f_defect": tol["defect"], "eg_defect": tol["defect"], "el_residual_max": tol["el"],
    }
    problems = []
    if fresh["contour_id"] != stored["contour_id"]:
        problems.append("contour_id: boundary data does not match the report")
    for key in _CHECKED:
        diff = abs(float(fresh[key]) - float(stored[key]))
        if not diff <= bounds[key]:
            problems.append(f"{key}: stored {stored[key]!r}, recomputed {fresh[key]!r} "
                            f"(|diff| {diff:.3g} > {bounds[key]:.3g})")
    if fresh["gap"] < -1e-8:
        problems.append(f"gap: negative ({fresh['gap']:.3g})")
    if stored.get("converged"):
        for key in ("f_defect", "eg_defect"):
            if fresh[key] >= tol["defect"]:
                problems.append(f"{key}: {fresh[key]:.3g} not below defect_tol {tol['defect']:.3g}")
    return problems


def cmd_check(args):
    stored = read_json(args.report)
    try:
        anchors = stored["anchors"]
        stored["config"], stored["tolerances"]
    except (KeyError, TypeError):
        raise ParseError(f"{args.report}: not a disc solve report") from None
    contour, phi = read_boundary(args.surface, anchors)
    problems = check_report(stored, contour, phi, refine=args.refine)
    for p in problems:
        print(f"violated: {p}", file=sys.stderr)
    if problems:
        return EXIT_CHECK
    print("all invariants hold")
    return EXIT_OK


def _common(p):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--nodes", type=int, help="boundary nodes N")
    p.add_argument("--grad-tol", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--max-degree", type=int)
    p.add_argument("--defect-tol", type=float)
    p.add_argument("--seed", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="plateau", description=__doc__)
    parser.add_argument("--threads", type=int, default=None,
                        help="cap on worker threads (default: $PLATEAU_THREADS or all cores)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="span a contour by a minimal disc")
    p.add_argument("--contour", required=True)
    p.add_argument("--restarts", type=int)
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("map2d", help="Riemann map onto a planar domain")
    p.add_argument("--contour", required=True)
    p.add_argument("--grid", type=_grid, default=10, help="univalency target grid, e.g. 10x10")
    p.add_argument("--restarts", type=int)
    _common(p)
    p.set_defaults(func=cmd_map2d)

    p = sub.add_parser("annulus", help="minimal annulus between two contours")
    p.add_argument("--contour1", required=True)
    p.add_argument("--contour2", required=True)
    p.add_argument("--modulus-bracket", type=_bracket)
    _common(p)
    p.set_defaults(func=cmd_annulus)

    p = sub.add_parser("check", help="re-verify a stored solve")
    p.add_argument("--report", required=True)
    p.add_argument("--surface", required=True, help="boundary.csv written next to the report")
    p.add_argument("--refine", type=int, default=1, help="quadrature grid refinement factor")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args._threads = _threads(args)
        with threadpool_limits(limits=args._threads):
            return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"plateau: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UnivalencyFailure as exc:
        print(f"plateau: {exc}", file=sys.stderr)
        return EXIT_UNIVALENCY
    except PlateauError as exc:
        print(f"plateau: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
