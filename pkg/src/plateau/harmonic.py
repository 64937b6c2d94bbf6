"""Harmonic extension of a boundary trace to the unit disc.

Each component of the trace is expanded in a truncated Fourier series and
extended as ``a_0/2 + sum_k rho^k (a_k cos k theta + b_k sin k theta)``,
which is exactly harmonic and has closed-form derivatives.  Internally the
series is held as complex coefficients ``c_k = a_k - i b_k`` so that
``r(z) = Re sum_k c_k z^k``.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .exceptions import DegreeError, DomainError


@dataclass(frozen=True)
class FourierBoundary:
    """Trigonometric coefficients of a trace ``g: circle -> R^n``.

    ``a[0]`` holds ``a_0`` (twice the mean); ``b[0]`` is always zero.
    """

    a: np.ndarray
    b: np.ndarray
    truncation_error: float = 0.0

    @property
    def dimension(self):
        return self.a.shape[1]

    @property
    def max_degree(self):
        return self.a.shape[0] - 1

    @property
    def complex_coefficients(self):
        c = self.a - 1j * self.b
        c[0] = 0.5 * self.a[0]
        return c

    def trace(self, theta):
        """Boundary values at angles ``theta``."""
        theta = np.asarray(theta, dtype=float)
        k = np.arange(self.max_degree + 1)
        arg = np.multiply.outer(theta, k)
        out = np.einsum('...k,kd->...d', np.cos(arg), self.a) + np.einsum(
            '...k,kd->...d', np.sin(arg), self.b)
        return out - 0.5 * self.a[0]

    def tail_fraction(self, fraction=0.1):
        """Share of the spectral energy carried by the top ``fraction`` of modes.

        A large value means the first derivatives blow up near the rim.
        """
        k = np.arange(self.max_degree + 1)
        per_mode = k * np.sum(self.a**2 + self.b**2, axis=1)
        total = per_mode.sum()
        if total == 0.0:
            return 0.0
        cut = int(np.ceil((1.0 - fraction) * self.max_degree))
        return float(per_mode[cut + 1:].sum() / total)


def fit_fourier(trace, max_degree=None, antialias=False):
    """Discrete Fourier coefficients of ``N`` equispaced boundary samples.

    Sample ``j`` is taken at angle ``2 pi j / N``.  The default degree is
    ``N // 2 - 1``.  With ``antialias=True`` the highest 10% of the kept
    modes are zeroed, which helps on noisy traces.
    """
    trace = np.asarray(trace, dtype=float)
    if trace.ndim == 1:
        trace = trace[:, None]
    n = trace.shape[0]
    if max_degree is None:
        max_degree = n // 2 - 1
    if max_degree < 0 or n < 2 * max_degree + 1:
        raise DegreeError(f"{n} samples cannot resolve degree {max_degree}")
    spec = np.fft.rfft(trace, axis=0)[: max_degree + 1] * (2.0 / n)
    a = spec.real.copy()
    b = -spec.imag
    b[0] = 0.0
    if antialias and max_degree > 0:
        cut = max(1, int(np.ceil(0.9 * max_degree)))
        a[cut + 1:] = 0.0
        b[cut + 1:] = 0.0
    fb = FourierBoundary(a, b)
    theta = 2.0 * np.pi * np.arange(n) / n
    err = float(np.max(np.abs(fb.trace(theta) - trace))) if n <= 4096 else float("nan")
    return FourierBoundary(a, b, truncation_error=err)


@dataclass(frozen=True)
class FirstFundamentalForm:
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray

    @property
    def det(self):
        return self.E * self.G - self.F**2


class HarmonicDisc:
    """Harmonic map from the unit disc into R^n with given boundary series."""

    def __init__(self, boundary):
        self.boundary = boundary
        self._c = boundary.complex_coefficients
        k = np.arange(boundary.max_degree + 1)
        self._dc = (k[:, None] * self._c)[1:]

    @classmethod
    def from_trace(cls, trace, max_degree=None, antialias=False):
        return cls(fit_fourier(trace, max_degree, antialias))

    @property
    def dimension(self):
        return self.boundary.dimension

    @property
    def degree(self):
        return self.boundary.max_degree

    def _horner(self, coef, z):
        acc = np.broadcast_to(coef[-1], z.shape + coef.shape[1:]).astype(complex)
        zz = z[..., None]
        for c in coef[-2::-1]:
            acc = acc * zz + c
        return acc

    def values(self, z):
        """Surface points at complex disc points ``z`` (no domain check)."""
        z = np.asarray(z, dtype=complex)
        return self._horner(self._c, z).real

    def derivatives(self, z):
        """(dr/du, dr/dv) at complex disc points ``z`` (no domain check)."""
        z = np.asarray(z, dtype=complex)
        if self._dc.shape[0] == 0:
            zero = np.zeros(z.shape + (self.dimension,))
            return zero, zero
        w = self._horner(self._dc, z)
        return w.real, -w.imag

    def ring_derivatives(self, rho, n_theta):
        return derivative_rings(self, rho, n_theta)

    def __call__(self, u, v):
        return eval_harmonic(self, u, v)


def _as_disc_points(u, v):
    z = np.asarray(u, dtype=float) + 1j * np.asarray(v, dtype=float)
    if np.any(np.abs(z) >= 1.0):
        raise DomainError("evaluation points must satisfy u^2 + v^2 < 1")
    return z


def eval_harmonic(h, u, v):
    """Evaluate the harmonic extension at interior point(s) ``(u, v)``."""
    return h.values(_as_disc_points(u, v))


def first_fundamental_form(h, u, v):
    """E, F, G of the harmonic map at interior point(s), from exact derivatives."""
    ru, rv = h.derivatives(_as_disc_points(u, v))
    return FirstFundamentalForm(
        np.sum(ru * ru, axis=-1), np.sum(ru * rv, axis=-1), np.sum(rv * rv, axis=-1)
    )


@dataclass(frozen=True)
class PolarGrid:
    """Tensor grid: trapezoid in theta, Gauss-Legendre in rho on [r0, 1]."""

    n_theta: int = 256
    n_rho: int = 64
    inner_radius: float = 0.0

    def nodes(self):
        x, w = np.polynomial.legendre.leggauss(self.n_rho)
        r0 = self.inner_radius
        rho = r0 + (1.0 - r0) * 0.5 * (x + 1.0)
        w_rho = (1.0 - r0) * 0.5 * w
        theta = 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta
        # area element rho drho dtheta folded into the weights
        weights = np.outer(w_rho * rho, np.full(self.n_theta, 2.0 * np.pi / self.n_theta))
        z = np.outer(rho, np.exp(1j * theta))
        return z, weights

    def refined(self, factor=2):
        return PolarGrid(self.n_theta * factor, self.n_rho * factor, self.inner_radius)


DEFAULT_GRID = PolarGrid()


def derivative_rings(h, rho, n_theta):
    """Complex derivative ``f'(z)`` on rings ``|z| = rho_i`` at ``n_theta`` angles.

    Uses one FFT per ring; coefficients above ``n_theta`` are folded back
    onto the grid, which keeps the samples exact for any degree.
    Returns an array of shape (len(rho), n_theta, n).
    """
    dc = h._dc  # (K, n): coefficient m multiplies z^m
    if dc.shape[0] == 0:
        return np.zeros((len(rho), n_theta, h.dimension), dtype=complex)
    return laurent_rings(dc, np.arange(dc.shape[0]), rho, n_theta)


def laurent_rings(coef, powers, rho, n_theta, scale=None):
    """``sum_m coef_m (z / scale_m)^m`` on rings ``|z| = rho_i`` at ``n_theta`` angles.

    ``powers`` may be negative; ``scale`` (default 1) keeps large negative
    powers bounded.  Powers beyond the grid fold back onto it, so the
    samples are exact for any degree.
    """
    m = np.asarray(powers)
    dc = np.asarray(coef)
    r = np.asarray(rho, dtype=float)[:, None]
    if scale is not None:
        r = r / np.asarray(scale, dtype=float)[None, :]
    with np.errstate(under="ignore", over="ignore"):
        pw = r**m
    coef = pw[:, :, None] * dc[None, :, :]
    folded = np.zeros((len(rho), n_theta, dc.shape[1]), dtype=complex)
    np.add.at(folded, (slice(None), m % n_theta), coef)
    return np.fft.ifft(folded, axis=1) * n_theta


def grid_fundamental_form(h, grid=DEFAULT_GRID):
    """E, F, G sampled on a quadrature grid together with its weights."""
    z, weights = grid.nodes()
    rho = np.abs(z[:, 0])
    w = h.ring_derivatives(rho, grid.n_theta)
    ru, rv = w.real, -w.imag
    fff = FirstFundamentalForm(
        np.sum(ru * ru, axis=-1), np.sum(ru * rv, axis=-1), np.sum(rv * rv, axis=-1)
    )
    return fff, weights


def dirichlet_energy(h):
    """Closed-form Dirichlet energy ``(pi/2) sum_k k (|a_k|^2 + |b_k|^2)``."""
    b = h.boundary if isinstance(h, HarmonicDisc) else h
    k = np.arange(b.max_degree + 1)
    return float(0.5 * np.pi * np.sum(k * np.sum(b.a**2 + b.b**2, axis=1)))


def dirichlet_energy_quadrature(h, grid=DEFAULT_GRID):
    """``1/2 iint (E + G)`` by polar quadrature; cross-check for :func:`dirichlet_energy`."""
    fff, w = grid_fundamental_form(h, grid)
    return float(0.5 * np.sum(w * (fff.E + fff.G)))


def area(h, grid=DEFAULT_GRID, return_clipped=False):
    """``iint sqrt(EG - F^2)`` by polar quadrature.

    Negative radicands (truncation noise near branch points) are clipped to
    zero; pass ``return_clipped=True`` to also get how many were clipped.
    """
    fff, w = grid_fundamental_form(h, grid)
    det = fff.det
    clipped = int(np.count_nonzero(det < 0.0))
    value = float(np.sum(w * np.sqrt(np.maximum(det, 0.0))))
    return (value, clipped) if return_clipped else value


@dataclass(frozen=True)
class BranchPoint:
    u: float
    v: float
    energy_density: float


def find_branch_points(h, tol=1e-2, n_grid=81, radius=0.95):
    """Interior zeros of the conformal factor.

    Scans ``E + G`` on a square grid clipped to the disc of the given
    radius, keeps local minima below ``tol * mean(E + G)`` and polishes each
    with a bounded local search.
    """
    x = np.linspace(-radius, radius, n_grid)
    step = x[1] - x[0]
    uu, vv = np.meshgrid(x, x, indexing="ij")
    z = uu + 1j * vv
    inside = np.abs(z) < radius
    ru, rv = h.derivatives(z)
    s = np.sum(ru * ru + rv * rv, axis=-1)
    mean = s[inside].mean()
    if mean == 0.0:
        return []
    s_masked = np.where(inside, s, np.inf)
    padded = np.pad(s_masked, 1, constant_values=np.inf)
    is_min = np.ones_like(inside)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = padded[1 + di: 1 + di + n_grid, 1 + dj: 1 + dj + n_grid]
            is_min &= s_masked <= nb
            is_min &= np.isfinite(nb)
    cand = np.argwhere(is_min & inside & (s < tol * mean))

    def density(p):
        ru, rv = h.derivatives(np.array(p[0] + 1j * p[1]))
        return float(np.sum(ru * ru + rv * rv))

    found = []
    for i, j in cand:
        res = minimize(density, [uu[i, j], vv[i, j]], method="L-BFGS-B",
                       bounds=[(uu[i, j] - step, uu[i, j] + step),
                               (vv[i, j] - step, vv[i, j] + step)])
        u, v = res.x
        if any(np.hypot(u - b.u, v - b.v) < step for b in found):
            continue
        found.append(BranchPoint(float(u), float(v), float(res.fun)))
    return found


def poisson_extension(trace, u, v):
    """Direct Poisson-integral value of the harmonic extension at (u, v).

    Trapezoid rule over the ``N`` equispaced samples; only meant as an
    independent check on the Fourier route.
    """
    trace = np.asarray(trace, dtype=float)
    n = trace.shape[0]
    theta = 2.0 * np.pi * np.arange(n) / n
    z = _as_disc_points(u, v)
    rho, ang = np.abs(z), np.angle(z)
    kern = (1.0 - rho[..., None] ** 2) / (
        1.0 - 2.0 * rho[..., None] * np.cos(ang[..., None] - theta) + rho[..., None] ** 2
    )
    return np.einsum('...j,jd->...d', kern, trace) / n


def write_obj(h, path, n_rho=32, n_theta=128, sidecar=None):
    """Write the surface sampled on a polar grid as a Wavefront OBJ mesh.

    Only the first three coordinates go into the OBJ (planar maps get
    ``z = 0``).  When the surface lives in more than three dimensions all
    coordinates are written to ``sidecar`` (default: same stem, ``.csv``).
    Returns the list of files written.
    """
    path = Path(path)
    rho = np.arange(1, n_rho + 1) / n_rho
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    z = np.concatenate([[0.0 + 0.0j], np.outer(rho, np.exp(1j * theta)).ravel()])
    pts = h.values(z)
    return _write_mesh(pts, n_rho, n_theta, path, sidecar, center=True)


def _write_mesh(pts, n_ring, n_theta, path, sidecar=None, center=True):
    path = Path(path)
    xyz = np.zeros((len(pts), 3))
    xyz[:, : min(3, pts.shape[1])] = pts[:, :3]
    faces = []
    off = 1 if center else 0

    def vid(i, j):
        return off + i * n_theta + (j % n_theta) + 1

    if center:
        faces += [(1, vid(0, j), vid(0, j + 1)) for j in range(n_theta)]
    for i in range(n_ring - 1):
        for j in range(n_theta):
            a, b, c, d = vid(i, j), vid(i, j + 1), vid(i + 1, j + 1), vid(i + 1, j)
            faces += [(a, b, c), (a, c, d)]
    with open(path, "w") as fh:
        for p in xyz:
            fh.write("v {:.17g} {:.17g} {:.17g}\n".format(*p))
        for f in faces:
            fh.write("f {} {} {}\n".format(*f))
    written = [path]
    if pts.shape[1] > 3:
        side = Path(sidecar) if sidecar else path.with_suffix(".csv")
        with open(side, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow([f"x{k}" for k in range(pts.shape[1])])
            for p in pts:
                wr.writerow([format(x, ".17g") for x in p])
        written.append(side)
    return written
