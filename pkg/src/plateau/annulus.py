"""Two contours: a doubly connected minimal surface over an annulus.

The parameter domain is ``A_rho = {rho <= |z| <= 1}``; the first contour is
traced on the outer circle and the second on the inner one.  For a fixed
modulus ``rho`` each component of the surface is the harmonic function

    u = A + B log r + sum_k (c_k r^k + e_k (rho / r)^k) e^{ik theta}

fitted to the two boundary traces, whose Dirichlet energy is a closed form
in the traces' Fourier coefficients.  Minimising it over both boundary
correspondences and then over ``rho`` gives the conformal annulus; the
stationarity in ``rho`` is what fixes the conformal type.
"""

import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import douglas as dg
from .contour import as_contour
from .diagnostics import _chain_from_form, _defect_from_form
from .exceptions import DegenerateContour, ModulusAtBracketEnd, NotConverged, ValidationError
from .harmonic import FirstFundamentalForm, PolarGrid, _write_mesh, laurent_rings
from .optimize import lbfgs
from .solver import MIN_LENGTH, SolverConfig, contour_id, log_increment_basis

logger = logging.getLogger(__name__)

TWO_PI = dg.TWO_PI


# -- the energy in closed form -------------------------------------------------

def mode_energy(c1, c2, rho):
    """Dirichlet energy of the annular extension from complex trace coefficients.

    ``c1``, ``c2`` have shape (K + 1, n): row 0 holds the means, row ``k``
    the coefficient of ``e^{ik theta}`` with the trace equal to
    ``Re sum_k c_k e^{ik theta}`` (so ``c_k = a_k - i b_k``).
    """
    return _mode_energy(c1, c2, rho)[0]


def _mode_energy(c1, c2, rho, need_grad=False):
    kmax = c1.shape[0] - 1
    k = np.arange(1, kmax + 1)[:, None]
    with np.errstate(under="ignore"):
        q = rho ** k
    d = 1.0 - q * q
    a, b = c1[1:], c2[1:]
    s = np.abs(a) ** 2 + np.abs(b) ** 2
    p = (a * np.conj(b)).real
    pre = 0.5 * np.pi * k / d
    log_len = -np.log(rho)
    dm = (c2[0] - c1[0]).real
    energy = float(np.sum(pre * ((1.0 + q * q) * s - 4.0 * q * p)) + np.pi * np.sum(dm * dm) / log_len)
    if not need_grad:
        return energy, None, None, None
    # real gradient in (Re, Im) packed as complex: d/dRe + i d/dIm
    g1 = np.zeros_like(c1)
    g2 = np.zeros_like(c2)
    g1[1:] = pre * (2.0 * (1.0 + q * q) * a - 4.0 * q * b)
    g2[1:] = pre * (2.0 * (1.0 + q * q) * b - 4.0 * q * a)
    g1[0] = -2.0 * np.pi * dm / log_len
    g2[0] = 2.0 * np.pi * dm / log_len
    de_dq = 2.0 * np.pi * k * (q * s - p * (1.0 + q * q)) / (d * d)
    with np.errstate(under="ignore"):
        dq = k * rho ** (k - 1)
    de_drho = float(np.sum(de_dq * dq) + np.pi * np.sum(dm * dm) / (log_len**2 * rho))
    return energy, g1, g2, de_drho


def trace_coefficients(p, angles, kmax, weights="spectral"):
    """Fourier coefficients of ``g o phi^{-1}`` from the node values.

    Substituting ``theta = phi(s)`` turns the Fourier integrals into sums
    over the uniform contour nodes with weights ``h phi'(s_j)``.
    Returns ``(coefficients, phase table, weights)``.
    """
    w = dg._weights(angles, weights)
    k = np.arange(kmax + 1)
    ph = np.exp(-1j * np.multiply.outer(k, angles))  # (K+1, N)
    scale = np.full(kmax + 1, 1.0 / np.pi)
    scale[0] = 0.5 / np.pi
    coef = np.sum(ph[:, :, None] * (w[:, None] * p)[None, :, :], axis=1) * scale[:, None]
    return coef, ph, w


def _coefficient_pullback(g, p, ph, w, weights):
    """Gradient in the node angles of ``Re sum conj(g) . c`` (``c`` from :func:`trace_coefficients`)."""
    kmax = g.shape[0] - 1
    k = np.arange(kmax + 1)
    scale = np.full(kmax + 1, 1.0 / np.pi)
    scale[0] = 0.5 / np.pi
    # t[k, j] = sum over components conj(g_k) . p_j
    t = np.sum(np.conj(g)[:, None, :] * p[None, :, :], axis=2) * scale[:, None] * ph
    per_weight = np.sum(t.real, axis=0)
    direct = np.sum((t * (-1j * k[:, None])).real, axis=0) * w
    h = TWO_PI / len(w)
    return direct - h * dg._DERIVATIVES[weights](per_weight)


# -- the harmonic map on the annulus -------------------------------------------

class AnnulusMap:
    """Harmonic map ``A_rho -> R^n`` given by its Laurent data."""

    def __init__(self, outer, inner, rho):
        """``outer`` / ``inner``: complex trace coefficients, shape (K + 1, n)."""
        self.rho = float(rho)
        self.outer = np.asarray(outer, dtype=complex)
        self.inner = np.asarray(inner, dtype=complex)
        kmax = self.outer.shape[0] - 1
        k = np.arange(1, kmax + 1)[:, None]
        with np.errstate(under="ignore"):
            q = self.rho ** k
        d = 1.0 - q * q
        a, b = self.outer[1:], self.inner[1:]
        self.c = (a - q * b) / d
        self.e = (b - q * a) / d
        self.mean = self.outer[0].real
        self.log_coef = (self.inner[0] - self.outer[0]).real / np.log(self.rho)
        # u = Re F(z) + A + B log|z| with F = sum c_k z^k + conj(e_k) (rho / z)^k
        self._k = k[:, 0]
        self._neg = np.conj(self.e)

    @property
    def dimension(self):
        return self.outer.shape[1]

    @property
    def degree(self):
        return self.outer.shape[0] - 1

    def _check(self, z):
        r = np.abs(z)
        if np.any(r < self.rho * (1.0 - 1e-12)) or np.any(r > 1.0 + 1e-12):
            raise ValidationError("points must lie in the closed annulus rho <= |z| <= 1")

    def values(self, z):
        z = np.asarray(z, dtype=complex)
        self._check(z)
        zz = z[..., None, None]
        k = self._k[:, None]
        with np.errstate(under="ignore"):
            terms = self.c * zz**k + self._neg * (self.rho / zz) ** k
        return (np.sum(terms, axis=-2).real + self.mean
                + self.log_coef * np.log(np.abs(z))[..., None])

    def derivatives(self, z):
        z = np.asarray(z, dtype=complex)
        self._check(z)
        zz = z[..., None, None]
        k = self._k[:, None]
        with np.errstate(under="ignore"):
            w = np.sum(k * self.c * zz ** (k - 1) - k * self._neg * (self.rho / zz) ** k / zz,
                       axis=-2)
        w = w + self.log_coef / z[..., None]
        return w.real, -w.imag

    def ring_derivatives(self, rho, n_theta):
        k = self._k
        # k conj(e_k) rho^k z^(-k-1) = (k conj(e_k) / rho) (z / rho)^(-k-1)
        coef = np.concatenate([k[:, None] * self.c, -k[:, None] * self._neg / self.rho,
                               self.log_coef[None, :]])
        powers = np.concatenate([k - 1, -k - 1, [-1]])
        scale = np.concatenate([np.ones(len(k)), np.full(len(k), self.rho), [1.0]])
        return laurent_rings(coef.astype(complex), powers, rho, n_theta, scale)

    def dirichlet_energy(self):
        return mode_energy(self.outer, self.inner, self.rho)


def annulus_grid(rho, cfg, degree):
    return PolarGrid(max(cfg.grid_theta, 2 * degree + 4), cfg.grid_rho, inner_radius=rho)


def annulus_certify(m, grid):
    z, w = grid.nodes()
    d = m.ring_derivatives(np.abs(z[:, 0]), grid.n_theta)
    ru, rv = d.real, -d.imag
    fff = FirstFundamentalForm(np.sum(ru * ru, -1), np.sum(ru * rv, -1), np.sum(rv * rv, -1))
    return _defect_from_form(fff, w), _chain_from_form(fff, w)


def write_annulus_obj(m, path, n_ring=32, n_theta=128, sidecar=None):
    r = m.rho + (1.0 - m.rho) * np.arange(n_ring) / (n_ring - 1)
    theta = TWO_PI * np.arange(n_theta) / n_theta
    pts = m.values(np.outer(r, np.exp(1j * theta)).ravel())
    return _write_mesh(pts, n_ring, n_theta, path, sidecar, center=False)


# -- optimisation ----------------------------------------------------------------

@dataclass
class AnnulusReport:
    contour_ids: list
    modulus: float
    energy: float
    dirichlet_energy: float
    area: float
    gap: float
    f_defect: float
    eg_defect: float
    d_energy_d_rho: float
    grad_norm: float
    iterations: int
    converged: bool
    at_bracket_end: bool
    message: str
    modulus_trace: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


@dataclass
class AnnulusSolution:
    modulus: float
    outer: dg.Reparameterization
    inner: dg.Reparameterization
    surface: AnnulusMap
    energy_trace: list
    report: AnnulusReport = None


class _Problem:
    """Energy of the pair of correspondences at fixed modulus."""

    def __init__(self, c1, c2, cfg):
        self.cfg = cfg
        n = cfg.n_nodes
        self.n = n
        self.kmax = cfg.max_degree or n // 4
        self.p1, _ = dg.node_data(c1, n)
        self.p2, _ = dg.node_data(c2, n)
        self.basis = log_increment_basis(n, cfg.n_modes)
        self.nb = self.basis.shape[1]
        self.anchor = np.array([0])

    def angles(self, y):
        x1 = np.sum(self.basis * y[None, : self.nb], axis=1)
        x2 = np.sum(self.basis * y[None, self.nb: 2 * self.nb], axis=1)
        a1 = dg._angles_from_logs(x1, self.anchor, np.array([0.0]))
        a2 = dg._angles_from_logs(x2, self.anchor, np.array([y[-1]]))
        return x1, x2, a1, a2

    def reparameterizations(self, y):
        _, _, a1, a2 = self.angles(y)
        return (dg.Reparameterization(a1, self.anchor, np.array([0.0])),
                dg.Reparameterization(a2, self.anchor, np.array([y[-1]])))

    def evaluate(self, y, rho, need_grad=True):
        wts = self.cfg.weights
        x1, x2, a1, a2 = self.angles(y)
        c1, ph1, w1 = trace_coefficients(self.p1, a1, self.kmax, wts)
        c2, ph2, w2 = trace_coefficients(self.p2, a2, self.kmax, wts)
        if np.any(w1 <= 0) or np.any(w2 <= 0):
            return np.inf, None, None, None
        f, g1, g2, de_drho = _mode_energy(c1, c2, rho, need_grad)
        if not need_grad:
            return f, None, None, None
        gp1 = _coefficient_pullback(g1, self.p1, ph1, w1, wts)
        gp2 = _coefficient_pullback(g2, self.p2, ph2, w2, wts)
        # the inner anchor moves every inner node with it
        g_offset = float(np.sum(gp2))
        gp1[0] = 0.0
        gp2[0] = 0.0
        gx1 = dg.pull_back_gradient(gp1, x1, self.anchor, np.array([0.0]))
        gx2 = dg.pull_back_gradient(gp2, x2, self.anchor, np.array([y[-1]]))
        gy = np.concatenate([np.sum(self.basis * gx1[:, None], axis=0),
                             np.sum(self.basis * gx2[:, None], axis=0), [g_offset]])
        return f, gy, (c1, c2), de_drho

    def minimize(self, rho, y0):
        def fun(y):
            f, g, _, _ = self.evaluate(y, rho)
            if not np.isfinite(f):
                return np.inf, np.full_like(y, np.nan), np.inf
            return f, g, float(np.linalg.norm(g))

        cfg = self.cfg
        return lbfgs(fun, y0, grad_tol=cfg.grad_tol, max_iters=cfg.max_iters,
                     memory=cfg.memory, init_step=cfg.init_step, backtrack=cfg.backtrack,
                     armijo=cfg.armijo, gradient_descent=cfg.gradient_descent)


def _golden(fun, lo, hi, tol):
    inv = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1, x2 = b - inv * (b - a), a + inv * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = fun(x2)
    return x1 if f1 <= f2 else x2


def solve_two_contours(contour1, contour2, cfg=None, strict=False):
    """Span two closed contours by a minimal annulus.

    ``contour1`` is placed on ``|z| = 1`` and ``contour2`` on
    ``|z| = rho``; both should run in the same rotational sense.  For each
    trial ``rho`` the energy is minimised over both correspondences (the
    outer one pinned at a single node, the inner one free to rotate).
    ``cfg.modulus_search`` selects a golden-section search on that inner
    minimum or a root search on its derivative in ``rho``.

    Raises :class:`ModulusAtBracketEnd` when the best modulus sits at an
    end of ``cfg.modulus_bracket``: the optimum lies outside, or the
    surface degenerates (no connected annulus).  The exception carries the
    solution.
    """
    cfg = cfg or SolverConfig()
    c1, c2 = as_contour(contour1), as_contour(contour2)
    if c1.dimension != c2.dimension:
        raise ValidationError("contours live in spaces of different dimension")
    for c in (c1, c2):
        if c.length < MIN_LENGTH:
            raise DegenerateContour(f"contour length {c.length:.3g} is below {MIN_LENGTH}")
    prob = _Problem(c1, c2, cfg)
    lo, hi = cfg.modulus_bracket
    cache = {}
    start = {"y": np.zeros(2 * prob.nb + 1)}

    def inner(rho):
        rho = float(rho)
        if rho not in cache:
            res = prob.minimize(rho, start["y"])
            start["y"] = res.x
            cache[rho] = res
            logger.debug("rho=%.6f energy=%.12g grad=%.3g", rho, res.fun, res.grad_norm)
        return cache[rho].fun

    if cfg.modulus_search == "golden":
        rho = _golden(inner, lo, hi, cfg.modulus_tol)
    else:
        def slope(r):
            inner(r)
            return prob.evaluate(cache[float(r)].x, float(r))[3]

        s_lo, s_hi = slope(lo), slope(hi)
        if s_lo * s_hi > 0:
            rho = lo if inner(lo) <= inner(hi) else hi
        else:
            rho = brentq(slope, lo, hi, xtol=cfg.modulus_tol)
    rho = float(rho)
    inner(rho)
    best = cache[rho]
    f, _, (co1, co2), de_drho = prob.evaluate(best.x, rho)
    phi1, phi2 = prob.reparameterizations(best.x)
    surface = _fine_surface(c1, c2, phi1, phi2, rho, cfg)
    trace = sorted((r, res.fun) for r, res in cache.items())

    grid = annulus_grid(rho, cfg, surface.degree)
    defect, chain = annulus_certify(surface, grid)
    edge = 2.0 * cfg.modulus_tol + 1e-12
    at_end = bool(rho - lo <= edge or hi - rho <= edge)
    grad_ok = best.grad_norm < cfg.grad_tol
    defect_ok = defect.f_defect < cfg.defect_tol and defect.eg_defect < cfg.defect_tol
    report = AnnulusReport(
        contour_ids=[contour_id(c1), contour_id(c2)],
        modulus=rho,
        energy=float(best.fun),
        dirichlet_energy=float(surface.dirichlet_energy()),
        area=chain.area,
        gap=chain.gap,
        f_defect=defect.f_defect,
        eg_defect=defect.eg_defect,
        d_energy_d_rho=float(de_drho),
        grad_norm=float(best.grad_norm),
        iterations=int(sum(r.iterations for r in cache.values())),
        converged=bool(grad_ok and defect_ok and not at_end),
        at_bracket_end=at_end,
        message=best.message,
        modulus_trace=[[r, e] for r, e in trace],
        tolerances={"grad": cfg.grad_tol, "defect": cfg.defect_tol, "modulus": cfg.modulus_tol},
    )
    sol = AnnulusSolution(rho, phi1, phi2, surface, trace, report)
    if at_end:
        raise ModulusAtBracketEnd(
            f"best modulus {rho:.6g} sits at the end of the bracket [{lo}, {hi}]; "
            "the optimum lies outside it or no connected annulus exists", sol)
    if not report.converged:
        msg = (f"annulus solve did not converge: grad_norm={best.grad_norm:.3g}, "
               f"defects=({defect.f_defect:.3g}, {defect.eg_defect:.3g})")
        if strict:
            raise NotConverged(msg, sol)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return sol


def _fine_surface(c1, c2, phi1, phi2, rho, cfg):
    """Laurent data from traces resampled at ``cfg.fit_samples`` angles."""
    m = cfg.fit_samples
    kmax = cfg.max_degree or m // 2 - 1

    def coefficients(c, phi):
        tr = dg.boundary_trace(c, phi, m)
        spec = np.fft.fft(tr, axis=0)[: kmax + 1] / m
        spec[1:] *= 2.0
        return spec

    return AnnulusMap(coefficients(c1, phi1), coefficients(c2, phi2), rho)


__all__ = [
    "AnnulusMap", "AnnulusReport", "AnnulusSolution", "annulus_certify", "mode_energy",
    "solve_two_contours", "trace_coefficients", "write_annulus_obj",
]
