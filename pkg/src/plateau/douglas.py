"""Douglas's boundary energy and its relatives.

The optimisation variable is a monotone angle map: node ``j`` of the
contour (parameter ``t_j = j/N``, or ``s_j = 2 pi j / N``) is sent to the
angle ``phi_j`` on the unit circle.  The double integral

    A = 1/(4 pi) iint |g(theta) - g(theta')|^2 / (4 sin^2((theta - theta')/2))

is evaluated after substituting ``theta = phi(s)``, which turns it into a
trapezoid sum over the uniform contour nodes with weights
``w_j = h phi'(s_j)``.  ``phi'`` comes from differentiating the periodic
part ``phi(s) - s`` (spectrally by default), so the weights are linear in
the node angles and the discrete energy has an exact gradient.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .contour import Contour
from .exceptions import PositivityWarning, ValidationError

TWO_PI = 2.0 * np.pi


# -- reparameterizations ----------------------------------------------------

def anchor_indices(n, offset=0):
    """Three anchor nodes splitting ``n`` nodes into near-equal thirds."""
    idx = sorted((offset + int(round(k * n / 3.0))) % n for k in range(3))
    if len(set(idx)) < 3:
        raise ValidationError(f"{n} nodes are too few for three anchors")
    return np.array(idx)


@dataclass(frozen=True, eq=False)
class Reparameterization:
    """Monotone node map ``j -> phi_j`` with three pinned nodes.

    ``angles`` is increasing modulo 2 pi starting from ``angles[0]``; the
    anchored nodes hold their pinned values exactly.
    """

    angles: np.ndarray
    anchors: np.ndarray
    anchor_angles: np.ndarray

    @property
    def n_nodes(self):
        return len(self.angles)

    @property
    def increments(self):
        """``d_j = phi_{j+1} - phi_j`` with the last gap closing the circle."""
        return np.diff(np.append(self.angles, self.angles[0] + TWO_PI))

    def is_monotone(self):
        d = self.increments
        return bool(np.all(d > 0) and abs(d.sum() - TWO_PI) < 1e-9)

    @classmethod
    def uniform(cls, n, anchor_offset=0):
        """Arclength start: ``phi_j = 2 pi j / n``."""
        anchors = anchor_indices(n, anchor_offset)
        angles = TWO_PI * np.arange(n) / n
        return cls(angles, anchors, angles[anchors].copy())

    @classmethod
    def from_angles(cls, angles, anchors=None, anchor_offset=0):
        angles = np.asarray(angles, dtype=float)
        if anchors is None:
            anchors = anchor_indices(len(angles), anchor_offset)
        anchors = np.asarray(anchors)
        return cls(angles, anchors, angles[anchors].copy())

    def log_increments(self):
        return np.log(self.increments)

    def with_log_increments(self, x):
        return Reparameterization(
            _angles_from_logs(x, self.anchors, self.anchor_angles),
            self.anchors, self.anchor_angles,
        )


def _arcs(anchors, n):
    """Gap index ranges ``[a_k, a_{k+1})`` (mod n) between consecutive anchors."""
    a = list(anchors) + [anchors[0] + n]
    return [np.arange(a[k], a[k + 1]) % n for k in range(len(anchors))]


def _angles_from_logs(x, anchors, anchor_angles):
    n = len(x)
    ang = np.empty(n)
    ends = list(anchor_angles) + [anchor_angles[0] + TWO_PI]
    for k, gaps in enumerate(_arcs(anchors, n)):
        span = ends[k + 1] - ends[k]
        e = np.exp(x[gaps] - np.max(x[gaps]))
        d = span * e / e.sum()
        # gap i moves node i + 1; the last gap lands on the next anchor
        ang[gaps] = ends[k] + np.concatenate([[0.0], np.cumsum(d[:-1])])
    ang[anchors] = anchor_angles
    return _unwrap(ang)


def _unwrap(angles):
    # angles[0] in [0, 2 pi), the rest increasing within one turn of it
    a0 = np.mod(angles[0], TWO_PI)
    return a0 + np.mod(angles - angles[0], TWO_PI)


def pull_back_gradient(grad_phi, x, anchors, anchor_angles):
    """Chain rule from node-angle gradient to log-increment gradient."""
    n = len(x)
    gx = np.zeros(n)
    ends = list(anchor_angles) + [anchor_angles[0] + TWO_PI]
    for k, gaps in enumerate(_arcs(anchors, n)):
        e = np.exp(x[gaps] - np.max(x[gaps]))
        p = e / e.sum()
        span_nodes = (gaps + 1) % n
        g_nodes = grad_phi[span_nodes].copy()
        g_nodes[-1] = 0.0  # arc end is an anchor
        # d phi_{node m} / d d_i = 1 for gap i before node m within the arc
        gd = np.cumsum(g_nodes[::-1])[::-1]
        gx[gaps] = (ends[k + 1] - ends[k]) * p * (gd - np.dot(p, gd))
    return gx


def project_gradient(grad_phi, anchors):
    g = np.array(grad_phi, dtype=float)
    g[anchors] = 0.0
    return g


# -- periodic differentiation -----------------------------------------------

def spectral_derivative(f, period=TWO_PI):
    """Derivative of periodic samples via FFT (Nyquist mode dropped)."""
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    k = np.fft.rfftfreq(n, d=1.0 / n) * (TWO_PI / period)
    spec = np.fft.rfft(f, axis=0)
    if n % 2 == 0:
        spec[-1] = 0.0
    shape = (-1,) + (1,) * (f.ndim - 1)
    return np.fft.irfft(1j * k.reshape(shape) * spec, n=n, axis=0)


def central_derivative(f, period=TWO_PI):
    f = np.asarray(f, dtype=float)
    h = period / f.shape[0]
    return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2.0 * h)


_DERIVATIVES = {"spectral": spectral_derivative, "trapezoid": central_derivative}


class TrigInterpolant:
    """Trigonometric interpolant of ``phi(s) - s`` through the node angles."""

    def __init__(self, angles):
        n = len(angles)
        s = TWO_PI * np.arange(n) / n
        self.n = n
        self.offset = angles[0]
        psi = angles - s - self.offset
        spec = np.fft.rfft(psi) / n
        self.k = np.arange(len(spec))
        w = np.full(len(spec), 2.0)
        w[0] = 1.0
        if n % 2 == 0:
            w[-1] = 1.0
        self.coef = spec * w

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        e = np.exp(1j * np.multiply.outer(s, self.k))
        return s + self.offset + np.einsum('...k,k->...', e, self.coef).real

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        e = np.exp(1j * np.multiply.outer(s, self.k))
        coef = 1j * self.k * self.coef
        if self.n % 2 == 0:
            coef[-1] = 0.0
        return 1.0 + np.einsum('...k,k->...', e, coef).real

    def inverse(self, theta, angles, iters=50):
        """Contour parameter ``s`` with ``phi(s) = theta``, safeguarded Newton."""
        n = self.n
        nodes_s = TWO_PI * np.arange(n + 1) / n
        nodes_phi = np.append(angles, angles[0] + TWO_PI)
        theta = np.asarray(theta, dtype=float)
        th = angles[0] + np.mod(theta - angles[0], TWO_PI)
        j = np.clip(np.searchsorted(nodes_phi, th, side="right") - 1, 0, n - 1)
        lo, hi = nodes_s[j], nodes_s[j + 1]
        s = lo + (th - nodes_phi[j]) / (nodes_phi[j + 1] - nodes_phi[j]) * (hi - lo)
        for _ in range(iters):
            f = self(s) - th
            lo = np.where(f < 0, s, lo)
            hi = np.where(f > 0, s, hi)
            step = f / self.derivative(s)
            new = s - step
            bad = (new <= lo) | (new >= hi) | ~np.isfinite(new)
            new = np.where(bad, 0.5 * (lo + hi), new)
            if np.max(np.abs(new - s)) < 1e-15:
                s = new
                break
            s = new
        return s


# -- node data --------------------------------------------------------------

def node_data(c, n):
    """Trace points and ``dg/ds`` at the ``n`` uniform contour nodes.

    ``c`` is a :class:`Contour` or an (n, dim) array of trace samples (the
    derivative is then taken spectrally).
    """
    if isinstance(c, Contour):
        t = np.arange(n) / n
        return c(t), c.derivative(t) / TWO_PI
    p = np.asarray(c, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    if p.shape[0] != n:
        raise ValidationError(f"trace has {p.shape[0]} samples, reparameterization {n}")
    return p, spectral_derivative(p)


def _pairwise_sq(p):
    d2 = np.zeros((p.shape[0], p.shape[0]))
    for k in range(p.shape[1]):
        diff = p[:, None, k] - p[None, :, k]
        d2 += diff * diff
    return d2


def _phase_tables(angles):
    delta = angles[:, None] - angles[None, :]
    half = 0.5 * delta
    sin_half = np.sin(half)
    np.fill_diagonal(sin_half, 1.0)
    return sin_half, np.cos(half)


def _weights(angles, weights):
    n = len(angles)
    h = TWO_PI / n
    s = h * np.arange(n)
    return h * (1.0 + _DERIVATIVES[weights](angles - angles[0] - s))


def douglas_energy_and_gradient(p, gs, angles, weights="spectral"):
    """Discrete A and its gradient with respect to every node angle.

    ``p`` and ``gs`` are the trace and ``dg/ds`` at the uniform nodes.
    Returns ``(inf, nan)`` if a quadrature weight turns non-positive.
    """
    n = len(angles)
    h = TWO_PI / n
    w = _weights(angles, weights)
    if np.any(w <= 0.0):
        return np.inf, np.full(n, np.nan)
    sin_half, cos_half = _phase_tables(angles)
    q = _pairwise_sq(p) / (4.0 * sin_half * sin_half)
    np.fill_diagonal(q, 0.0)
    cot = cos_half / sin_half
    np.fill_diagonal(cot, 0.0)
    v = np.sum(q * w[None, :], axis=1)
    diag = h * h * np.sum(gs * gs)
    energy = (np.sum(w * v) + diag) / (4.0 * np.pi)
    u = np.sum(q * cot * w[None, :], axis=1)
    grad = (-2.0 * h * _DERIVATIVES[weights](v) - 2.0 * w * u) / (4.0 * np.pi)
    return float(energy), grad


def douglas_energy(c, phi, weights="spectral"):
    """Discrete Douglas functional of the trace ``g o phi^{-1}``.

    The diagonal of the double sum uses the limit ``|dg/dtheta|^2``.
    """
    p, gs = node_data(c, phi.n_nodes)
    return douglas_energy_and_gradient(p, gs, phi.angles, weights)[0]


def douglas_gradient(c, phi, weights="spectral"):
    """Gradient of :func:`douglas_energy` in the node angles, anchors zeroed."""
    p, gs = node_data(c, phi.n_nodes)
    _, g = douglas_energy_and_gradient(p, gs, phi.angles, weights)
    return project_gradient(g, phi.anchors)


def douglas_energy_spectral(boundary):
    """``(pi/2) sum_k k (|a_k|^2 + |b_k|^2)``; equals A by Douglas's identity."""
    k = np.arange(boundary.max_degree + 1)
    return float(0.5 * np.pi * np.sum(k * np.sum(boundary.a**2 + boundary.b**2, axis=1)))


def boundary_trace(c, phi, n_samples=None):
    """Samples of ``g o phi^{-1}`` at ``n_samples`` equispaced angles."""
    n = phi.n_nodes
    m = n if n_samples is None else n_samples
    theta = TWO_PI * np.arange(m) / m
    s = TrigInterpolant(phi.angles).inverse(theta, phi.angles)
    if isinstance(c, Contour):
        return c(s / TWO_PI)
    # raw samples: trigonometric interpolation of the trace itself
    p = np.asarray(c, dtype=float)
    spec = np.fft.rfft(p, axis=0) / n
    w = np.full(spec.shape[0], 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    e = np.exp(1j * np.multiply.outer(s, np.arange(spec.shape[0])))
    return np.einsum('mk,kd->md', e, spec * w[:, None]).real


# -- kernel, log-sin energy, Euler-Lagrange residual -------------------------

@dataclass(frozen=True)
class KernelTable:
    """``K_ij = g_s(s_i) . g_s(s_j)`` with ``s`` the 2 pi-periodic parameter."""

    K: np.ndarray

    @property
    def n_nodes(self):
        return self.K.shape[0]

    @classmethod
    def from_contour(cls, c, n):
        _, gs = node_data(c, n)
        return cls.from_derivatives(gs)

    @classmethod
    def from_derivatives(cls, gs):
        gs = np.asarray(gs, dtype=float)
        k = np.zeros((gs.shape[0], gs.shape[0]))
        for d in range(gs.shape[1]):
            k += gs[:, None, d] * gs[None, :, d]
        return cls(k)


def kernel_table(c, n):
    return KernelTable.from_contour(c, n)


@dataclass(frozen=True)
class LogSinEnergy:
    value: float
    positivity_warning: bool


def log_sin_energy(kernel, phi, diagonal="exclude", weights="spectral"):
    """``-iint K log sin(|phi(t) - phi(tau)|/2) dt dtau`` by trapezoid sums.

    ``diagonal="exclude"`` drops the self cells (the log singularity is
    integrable); ``"analytic"`` adds their exact local contribution.
    The result carries a flag when ``K`` is not strictly positive, in which
    case this energy is no longer a sensible minimisation target.
    """
    K = kernel.K if isinstance(kernel, KernelTable) else np.asarray(kernel, dtype=float)
    n = K.shape[0]
    h = TWO_PI / n
    delta = np.abs(phi.angles[:, None] - phi.angles[None, :])
    np.fill_diagonal(delta, np.pi)
    logs = np.log(np.sin(0.5 * delta))
    np.fill_diagonal(logs, 0.0)
    value = -h * h * np.sum(K * logs)
    if diagonal == "analytic":
        dphi = _weights(phi.angles, weights) / h
        # iint over an h x h cell of log|a (x - y) / 2| = h^2 (log(a h / 2) - 3/2)
        value -= h * h * np.sum(np.diag(K) * (np.log(0.5 * dphi * h) - 1.5))
    elif diagonal != "exclude":
        raise ValueError(f"unknown diagonal treatment {diagonal!r}")
    flag = bool(np.any(K <= 0.0))
    if flag:
        warnings.warn("kernel g'(t).g'(tau) is not positive everywhere", PositivityWarning,
                      stacklevel=2)
    return LogSinEnergy(float(value), flag)


def el_residual(kernel, phi, corrected=True):
    """Cotangent integral ``int K(t, tau) cot((phi(t) - phi(tau))/2) dtau`` at each node.

    Trapezoid rule in ``tau``.  Off the diagonal the nodes pair up
    symmetrically about ``t``, so the odd ``1/(t - tau)`` part of the
    integrand cancels.  What is left of the integrand at ``tau = t`` is
    finite, ``K phi''/phi'^2 - 2 d_tau K / phi'``, and with
    ``corrected=True`` that value fills the self cell.  Leaving it out
    (``corrected=False``) costs an O(h) error.
    """
    K = kernel.K if isinstance(kernel, KernelTable) else np.asarray(kernel, dtype=float)
    n = K.shape[0]
    h = TWO_PI / n
    sin_half, cos_half = _phase_tables(phi.angles)
    cot = cos_half / sin_half
    np.fill_diagonal(cot, 0.0)
    res = h * np.sum(K * cot, axis=1)
    if corrected:
        periodic = phi.angles - phi.angles[0] - h * np.arange(n)
        d1 = 1.0 + spectral_derivative(periodic)
        d2 = spectral_derivative(spectral_derivative(periodic))
        k_tau = np.diag(spectral_derivative(K))
        res += h * (np.diag(K) * d2 / d1**2 - 2.0 * k_tau / d1)
    return res
