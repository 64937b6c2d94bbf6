"""Plateau solver: minimise Douglas's functional over boundary correspondences.

The contour stays fixed; the unknown is the monotone angle map ``phi``
(three nodes pinned to remove the Moebius gauge).  Minimising the
discrete functional gives the boundary trace whose harmonic extension is
conformal, i.e. a (possibly branched) minimal disc spanning the contour.
"""

import hashlib
import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import douglas as dg
from .contour import Contour, as_contour
from .diagnostics import certify
from .exceptions import DegenerateContour, NotConverged, UnivalencyFailure, ValidationError
from .harmonic import (HarmonicDisc, PolarGrid, area, dirichlet_energy, find_branch_points,
                       fit_fourier)
from .optimize import lbfgs

logger = logging.getLogger(__name__)

MIN_LENGTH = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings for the disc and annulus solvers."""

    n_nodes: int = 256
    max_degree: int = None
    max_iters: int = 3000
    grad_tol: float = 1e-9
    el_tol: float = 1e-3
    defect_tol: float = 1e-4
    init_step: float = 0.1
    backtrack: float = 0.5
    armijo: float = 1e-4
    memory: int = 12
    gradient_descent: bool = False
    weights: str = "spectral"
    anchor_offset: int = 0
    seed: int = None
    restarts: int = 0
    restart_scale: float = 0.2
    antialias: bool = False
    phi_modes: int = None
    fit_oversample: int = 4
    grid_theta: int = 256
    grid_rho: int = 64
    branch_tol: float = 1e-2
    modulus_bracket: tuple = (0.05, 0.95)
    modulus_tol: float = 1e-4
    modulus_search: str = "golden"

    def __post_init__(self):
        for name in ("grad_tol", "el_tol", "defect_tol", "modulus_tol"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        lo, hi = self.modulus_bracket
        if not 0.0 < lo < hi < 1.0:
            raise ValidationError("modulus bracket must satisfy 0 < lo < hi < 1")
        if self.n_nodes < 12:
            raise ValidationError("need at least 12 boundary nodes")
        if self.phi_modes is not None and not 1 <= self.phi_modes <= (self.n_nodes - 1) // 2:
            raise ValidationError("phi_modes must lie in [1, (n_nodes - 1) // 2]")
        if self.fit_oversample < 1:
            raise ValidationError("fit_oversample must be at least 1")
        if not 0.0 < self.backtrack < 1.0 or not 0.0 < self.armijo < 1.0:
            raise ValidationError("line-search constants must lie in (0, 1)")
        if self.weights not in ("spectral", "trapezoid"):
            raise ValidationError(f"unknown quadrature weights {self.weights!r}")
        if self.modulus_search not in ("golden", "stationary"):
            raise ValidationError(f"unknown modulus search {self.modulus_search!r}")
        object.__setattr__(self, "modulus_bracket", (float(lo), float(hi)))

    @property
    def grid(self):
        return PolarGrid(self.grid_theta, self.grid_rho)

    @property
    def n_modes(self):
        """Fourier modes allowed in the log-increments."""
        return self.n_nodes // 4 if self.phi_modes is None else self.phi_modes

    @property
    def fit_samples(self):
        return self.fit_oversample * self.n_nodes

    def grid_for(self, degree):
        """Quadrature grid fine enough in theta to resolve ``degree`` modes."""
        return PolarGrid(max(self.grid_theta, 2 * degree + 2), self.grid_rho)

    def to_dict(self):
        d = asdict(self)
        d["modulus_bracket"] = list(self.modulus_bracket)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "modulus_bracket" in d:
            d["modulus_bracket"] = tuple(d["modulus_bracket"])
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class SolveReport:
    """Energies, defects and convergence data of one solve."""

    contour_id: str
    n_nodes: int
    max_degree: int
    douglas_energy: float
    initial_energy: float
    dirichlet_energy: float
    dirichlet_quadrature: float
    area: float
    gap: float
    f_defect: float
    eg_defect: float
    el_residual_max: float
    grad_norm: float
    iterations: int
    grad_converged: bool
    converged: bool
    message: str
    branch_points: list = field(default_factory=list)
    history: list = field(default_factory=list)
    tail_fraction: float = 0.0
    clipped_radicands: int = 0
    tolerances: dict = field(default_factory=dict)
    anchors: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


@dataclass
class PlateauSolution:
    disc: HarmonicDisc
    reparameterization: dg.Reparameterization
    report: SolveReport
    contour: Contour

    def __iter__(self):
        return iter((self.disc, self.reparameterization, self.report))


def contour_id(c):
    return hashlib.sha256(np.ascontiguousarray(c.samples).tobytes()).hexdigest()[:16]


def log_increment_basis(n, modes):
    """Columns ``1, cos ks, sin ks`` (k = 1..modes) sampled at the nodes.

    The log-increments are kept in this band-limited span.  Left free
    node by node, they admit an odd/even sawtooth that lowers the discrete
    energy below the continuum minimum without converging to anything.
    """
    s = dg.TWO_PI * np.arange(n) / n
    cols = [np.ones(n)]
    for k in range(1, modes + 1):
        cols += [np.cos(k * s), np.sin(k * s)]
    return np.column_stack(cols)


def _objective(p, gs, template, basis, weights):
    def fun(y):
        x = np.sum(basis * y[None, :], axis=1)
        angles = dg._angles_from_logs(x, template.anchors, template.anchor_angles)
        f, g = dg.douglas_energy_and_gradient(p, gs, angles, weights)
        if not np.isfinite(f):
            return np.inf, np.full_like(y, np.nan), np.inf
        g = dg.project_gradient(g, template.anchors)
        gx = dg.pull_back_gradient(g, x, template.anchors, template.anchor_angles)
        gy = np.sum(basis * gx[:, None], axis=0)
        return f, gy, float(np.linalg.norm(gy))
    return fun


def minimize_reparameterization(c, cfg, y0=None):
    """Run the quasi-Newton descent; returns ``(Reparameterization, OptimizeResult)``.

    The optimisation variable is the coefficient vector ``y`` of the
    log-increments in :func:`log_increment_basis`; the recorded gradient
    norm is taken in those coordinates.
    """
    template = dg.Reparameterization.uniform(cfg.n_nodes, cfg.anchor_offset)
    p, gs = dg.node_data(c, cfg.n_nodes)
    basis = log_increment_basis(cfg.n_nodes, cfg.n_modes)
    fun = _objective(p, gs, template, basis, cfg.weights)
    if y0 is None:
        y0 = np.zeros(basis.shape[1])
    res = lbfgs(fun, y0, grad_tol=cfg.grad_tol, max_iters=cfg.max_iters, memory=cfg.memory,
                init_step=cfg.init_step, backtrack=cfg.backtrack, armijo=cfg.armijo,
                gradient_descent=cfg.gradient_descent)
    x = np.sum(basis * res.x[None, :], axis=1)
    return template.with_log_increments(x), res


def assemble_disc(c, phi, cfg):
    """Harmonic extension of ``g o phi^{-1}``.

    The trace is resampled at ``cfg.fit_samples`` angles: ``g o phi^{-1}``
    is much less smooth in the angle than ``phi`` is, and sampling it at
    only the node count loses most of its spectrum.
    """
    trace = dg.boundary_trace(c, phi, cfg.fit_samples)
    return HarmonicDisc(fit_fourier(trace, cfg.max_degree, cfg.antialias))


def build_report(c, phi, disc, cfg, opt=None, initial_energy=None):
    """Evaluate every diagnostic for a solved (or stored) boundary map."""
    p, gs = dg.node_data(c, phi.n_nodes)
    energy, grad = dg.douglas_energy_and_gradient(p, gs, phi.angles, cfg.weights)
    phi_grad_norm = float(np.linalg.norm(dg.project_gradient(grad, phi.anchors)))
    grad_norm = phi_grad_norm if opt is None else float(opt.grad_norm)
    grid = cfg.grid_for(disc.degree)
    defect, chain = certify(disc, grid)
    _, clipped = area(disc, grid, return_clipped=True)
    kernel = dg.KernelTable.from_derivatives(gs)
    residual = dg.el_residual(kernel, phi)
    punctured = dg.el_residual(kernel, phi, corrected=False)
    branch = find_branch_points(disc, tol=cfg.branch_tol)
    grad_ok = grad_norm < cfg.grad_tol
    defect_ok = defect.f_defect < cfg.defect_tol and defect.eg_defect < cfg.defect_tol
    return SolveReport(
        contour_id=contour_id(c),
        n_nodes=phi.n_nodes,
        max_degree=disc.degree,
        douglas_energy=energy,
        initial_energy=energy if initial_energy is None else initial_energy,
        dirichlet_energy=dirichlet_energy(disc),
        dirichlet_quadrature=chain.dirichlet,
        area=chain.area,
        gap=chain.gap,
        f_defect=defect.f_defect,
        eg_defect=defect.eg_defect,
        el_residual_max=float(np.max(np.abs(residual))),
        grad_norm=grad_norm,
        iterations=0 if opt is None else opt.iterations,
        grad_converged=grad_ok,
        converged=bool(grad_ok and defect_ok),
        message="" if opt is None else opt.message,
        branch_points=[asdict(b) for b in branch],
        history=[] if opt is None else [list(row) for row in opt.history],
        tail_fraction=disc.boundary.tail_fraction(),
        clipped_radicands=clipped,
        tolerances={
            "grad": cfg.grad_tol,
            "defect": cfg.defect_tol,
            "el": cfg.el_tol,
            "energy": 10.0 * cfg.grad_tol + 1e-8 * max(energy, 1.0),
        },
        anchors=[int(a) for a in phi.anchors],
        config=cfg.to_dict(),
        extra={
            "phi_grad_norm": phi_grad_norm,
            "el_residual_punctured_max": float(np.max(np.abs(punctured))),
            "grid": [grid.n_theta, grid.n_rho],
        },
    )


def solve_plateau(contour, cfg=None, strict=False):
    """Span ``contour`` by a conformal harmonic disc.

    Descends from the arclength start (plus ``cfg.restarts`` randomly
    perturbed starts when requested) until the projected gradient norm
    falls below ``cfg.grad_tol``.  ``report.converged`` additionally needs
    both conformality defects below ``cfg.defect_tol``.  With
    ``strict=True`` a non-converged solve raises :class:`NotConverged`
    carrying the result; otherwise a warning is issued.
    """
    cfg = cfg or SolverConfig()
    c = as_contour(contour)
    if c.length < MIN_LENGTH:
        raise DegenerateContour(f"contour length {c.length:.3g} is below {MIN_LENGTH}")
    template = dg.Reparameterization.uniform(cfg.n_nodes, cfg.anchor_offset)
    initial = dg.douglas_energy(c, template, cfg.weights)
    phi, opt = minimize_reparameterization(c, cfg)
    if cfg.restarts:
        rng = np.random.default_rng(cfg.seed)
        for _ in range(cfg.restarts):
            y0 = cfg.restart_scale * rng.standard_normal(2 * cfg.n_modes + 1)
            cand_phi, cand = minimize_reparameterization(c, cfg, y0)
            if cand.fun < opt.fun:
                phi, opt = cand_phi, cand
    disc = assemble_disc(c, phi, cfg)
    report = build_report(c, phi, disc, cfg, opt, initial)
    result = PlateauSolution(disc, phi, report, c)
    if not report.converged:
        msg = (f"solve did not converge: grad_norm={report.grad_norm:.3g}, "
               f"defects=({report.f_defect:.3g}, {report.eg_defect:.3g}), {opt.message}")
        if strict:
            raise NotConverged(msg, result)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return result


# -- planar mode --------------------------------------------------------------

@dataclass
class UnivalencyReport:
    univalent: bool
    targets: list
    winding_numbers: list
    jacobian_min: float
    det_min: float
    orientation: int
    offending: list

    def to_dict(self):
        return asdict(self)


def _inside_polygon(points, poly):
    """Winding number of a closed polygon around each point (planar)."""
    d = poly[None, :, :] - points[:, None, :]
    ang = np.arctan2(d[..., 1], d[..., 0])
    step = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
    step = (step + np.pi) % (2.0 * np.pi) - np.pi
    return np.rint(step.sum(axis=1) / (2.0 * np.pi)).astype(int)


def univalency_check(disc, contour, n_grid=10, eps=1e-3, n_curve=4096, grid=None):
    """Discrete argument principle on the image of ``|z| = 1 - eps``.

    Targets are the points of an ``n_grid x n_grid`` lattice over the
    contour's bounding box that lie inside the contour and clear of the
    image curve.  Univalent means winding number equal to the contour's
    orientation at every target and a Jacobian of that sign on the grid.
    """
    theta = 2.0 * np.pi * np.arange(n_curve) / n_curve
    circle = (1.0 - eps) * np.exp(1j * theta)
    image = disc.values(circle)[:, :2]
    trace = disc.boundary.trace(theta)[:, :2]
    margin = 2.0 * float(np.max(np.linalg.norm(image - trace, axis=1)))
    orient = 1 if contour.signed_area() > 0 else -1

    lo, hi = contour.samples.min(axis=0), contour.samples.max(axis=0)
    # lattice strictly inside the box, edges excluded
    xs = lo[0] + (hi[0] - lo[0]) * (np.arange(n_grid) + 0.5) / n_grid
    ys = lo[1] + (hi[1] - lo[1]) * (np.arange(n_grid) + 0.5) / n_grid
    pts = np.array([(x, y) for x in xs for y in ys])
    inside = _inside_polygon(pts, contour.samples) != 0
    dist = np.min(np.linalg.norm(pts[:, None, :] - contour.samples[None, :, :], axis=2), axis=1)
    targets = pts[inside & (dist > margin)]
    winding = _inside_polygon(targets, image) if len(targets) else np.zeros(0, int)

    grid = grid or PolarGrid(256, 64)
    z, _ = grid.nodes()
    z = z * (1.0 - eps)
    ru, rv = disc.derivatives(z)
    jac = ru[..., 0] * rv[..., 1] - rv[..., 0] * ru[..., 1]
    det = np.sum(ru * ru, -1) * np.sum(rv * rv, -1) - np.sum(ru * rv, -1) ** 2
    bad = [t.tolist() for t, w in zip(targets, winding) if w != orient]
    ok = not bad and float(np.min(orient * jac)) > 0.0 and len(targets) > 0
    return UnivalencyReport(
        univalent=bool(ok),
        targets=targets.tolist(),
        winding_numbers=[int(w) for w in winding],
        jacobian_min=float(np.min(orient * jac)),
        det_min=float(np.min(det)),
        orientation=orient,
        offending=bad,
    )


def riemann_map(contour, cfg=None, n_grid=10, eps=1e-3, strict=False):
    """Conformal map of the unit disc onto the interior of a planar contour.

    Returns ``(solution, univalency_report)``; raises
    :class:`UnivalencyFailure` when the argument-principle check fails.
    """
    c = as_contour(contour)
    if c.dimension != 2:
        raise ValidationError("riemann_map needs a planar (n=2) contour")
    sol = solve_plateau(c, cfg, strict=strict)
    uni = univalency_check(sol.disc, c, n_grid=n_grid, eps=eps)
    if not uni.univalent:
        raise UnivalencyFailure(
            f"map failed univalency check at {len(uni.offending)} targets "
            f"(jacobian min {uni.jacobian_min:.3g})", uni.offending, (sol, uni))
    return sol, uni


__all__ = [
    "SolverConfig", "SolveReport", "PlateauSolution", "solve_plateau", "riemann_map",
    "univalency_check", "UnivalencyReport",
]
