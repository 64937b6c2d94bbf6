"""Closed contours in R^n: construction, validation, resampling and evaluation.

A :class:`Contour` always holds ``M`` samples with equal consecutive chord
lengths, so the curve parameter ``t in [0, 1)`` is proportional to
cumulative chord length and sample ``j`` sits exactly at ``t = j / M``.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .exceptions import ParseError, ValidationError

MIN_SAMPLES = 8
DEFAULT_SAMPLES = 1024
# builtin rules are sampled this many times denser than the output
_OVERSAMPLE = 8

BUILTINS = ("circle", "ellipse", "tilted_circle", "skew_quad", "fourier_curve")


@dataclass(frozen=True, eq=False)
class Contour:
    """Closed curve in R^n sampled at ``M`` equal-chord points.

    Attributes
    ----------
    samples : ndarray, shape (M, n)
        Ordered points; the last one connects back to the first.
    source : dict
        Provenance tag: ``{"kind": "file"}`` or the builtin name and params.
    polygon : bool
        Straight-line interpolation between samples instead of a periodic
        cubic spline.
    arc_lengths : ndarray, shape (M + 1,)
        Cumulative chord lengths, from 0 to the total length ``L``.
    """

    samples: np.ndarray
    source: dict = field(default_factory=lambda: {"kind": "array"})
    polygon: bool = False
    arc_lengths: np.ndarray = field(init=False, repr=False)
    _spline: object = field(init=False, repr=False, default=None)

    def __post_init__(self):
        pts = np.array(self.samples, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "samples", pts)
        closed = np.vstack([pts, pts[:1]])
        chords = np.linalg.norm(np.diff(closed, axis=0), axis=1)
        arc = np.concatenate([[0.0], np.cumsum(chords)])
        arc.setflags(write=False)
        object.__setattr__(self, "arc_lengths", arc)
        if not self.polygon:
            knots = np.arange(len(pts) + 1) / len(pts)
            object.__setattr__(
                self, "_spline", CubicSpline(knots, closed, bc_type="periodic")
            )

    @property
    def dimension(self):
        return self.samples.shape[1]

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def length(self):
        return float(self.arc_lengths[-1])

    def __call__(self, t):
        return evaluate_contour(self, t)

    def derivative(self, t):
        return contour_derivative(self, t)

    def signed_area(self):
        """Shoelace area of the sample polygon (planar contours only)."""
        if self.dimension != 2:
            raise ValueError("signed area is only defined for planar contours")
        x, y = self.samples[:, 0], self.samples[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def evaluate_contour(c, t):
    """Point(s) on the contour at parameter ``t`` (periodic with period 1)."""
    t = np.mod(np.asarray(t, dtype=float), 1.0)
    if c.polygon:
        return _linear_eval(c.samples, t)
    return c._spline(t)


def contour_derivative(c, t):
    """Derivative of the contour with respect to ``t``.

    For polygons the derivative is piecewise constant and taken from the
    segment starting at or before ``t``.
    """
    t = np.mod(np.asarray(t, dtype=float), 1.0)
    if c.polygon:
        m = c.n_samples
        seg = np.minimum(np.floor(t * m).astype(int), m - 1)
        closed = np.vstack([c.samples, c.samples[:1]])
        return (closed[seg + 1] - closed[seg]) * m
    return c._spline(t, 1)


def _linear_eval(samples, t):
    m = len(samples)
    closed = np.vstack([samples, samples[:1]])
    s = t * m
    seg = np.minimum(np.floor(s).astype(int), m - 1)
    frac = (s - seg)[..., None]
    return closed[seg] * (1.0 - frac) + closed[seg + 1] * frac


def _check_raw_points(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise ValidationError("points must be an (M, n) array with n >= 2")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("points contain non-finite values")
    # an explicit closing copy of the first point is dropped
    if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
        pts = pts[:-1]
    if len(pts) < 4:
        raise ValidationError(f"need at least 4 distinct points, got {len(pts)}")
    gaps = np.linalg.norm(pts - np.roll(pts, -1, axis=0), axis=1)
    if np.any(gaps == 0.0):
        bad = int(np.flatnonzero(gaps == 0.0)[0])
        raise ValidationError(f"consecutive points {bad} and {(bad + 1) % len(pts)} coincide")
    return pts


def _segments_intersect(pts):
    """Indices (i, j) of the first pair of non-adjacent crossing chords, or None."""
    m = len(pts)
    a = pts
    b = np.roll(pts, -1, axis=0)

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (
            q[..., 1] - p[..., 1]
        ) * (r[..., 0] - p[..., 0])

    for i in range(m - 2):
        j = np.arange(i + 2, m if i > 0 else m - 1)
        if j.size == 0:
            continue
        d1 = orient(a[i], b[i], a[j])
        d2 = orient(a[i], b[i], b[j])
        d3 = orient(a[j], b[j], a[i])
        d4 = orient(a[j], b[j], b[i])
        hit = (d1 * d2 < 0) & (d3 * d4 < 0)
        if np.any(hit):
            return i, int(j[np.argmax(hit)])
    return None


def resample(points, m, polygon=False, tol=1e-14, max_iter=100):
    """Resample a closed polyline to ``m`` points with equal consecutive chords.

    The input is interpolated in its own cumulative-chord parameter
    (periodic cubic, or linear for polygons) and the output parameters are
    iterated until every output chord has the same length.  Resampling
    an already equal-chord sample set with the same ``m`` returns it.
    """
    pts = np.asarray(points, dtype=float)
    closed = np.vstack([pts, pts[:1]])
    knots = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(closed, axis=0), axis=1))])
    total = knots[-1]
    if polygon:
        def interp(s):
            s = np.mod(s, total)
            return np.column_stack(
                [np.interp(s, knots, closed[:, k]) for k in range(closed.shape[1])]
            )
    else:
        spline = CubicSpline(knots, closed, bc_type="periodic")

        def interp(s):
            return spline(np.mod(s, total))

    s = np.arange(m) * (total / m)
    for _ in range(max_iter):
        q = interp(s)
        chord = np.linalg.norm(q - np.roll(q, -1, axis=0), axis=1)
        cum = np.concatenate([[0.0], np.cumsum(chord)])
        target = np.arange(m) * (cum[-1] / m)
        if np.max(np.abs(cum[:-1] - target)) <= tol * cum[-1]:
            break
        s = np.interp(target, cum, np.append(s, s[0] + total))
    return q


def make_contour(points, samples=None, polygon=False, source=None, check_simple=True):
    """Validate raw points and build a resampled :class:`Contour`."""
    pts = _check_raw_points(points)
    m = DEFAULT_SAMPLES if samples is None else int(samples)
    if m < MIN_SAMPLES:
        raise ValidationError(f"need at least {MIN_SAMPLES} samples, got {m}")
    q = resample(pts, m, polygon=polygon)
    gaps = np.linalg.norm(q - np.roll(q, -1, axis=0), axis=1)
    if np.any(gaps == 0.0):
        raise ValidationError("resampled contour has coincident consecutive points")
    if check_simple and q.shape[1] == 2:
        hit = _segments_intersect(q)
        if hit is not None:
            raise ValidationError(f"planar contour self-intersects (chords {hit[0]} and {hit[1]})")
    return Contour(q, source=source or {"kind": "array"}, polygon=polygon)


# -- builtin families ---------------------------------------------------------

def _center(params, dim):
    c = np.zeros(dim)
    given = np.asarray(params.get("center", []), dtype=float)
    c[: given.size] = given
    return c


def builtin_points(name, params, dimension, count):
    """Raw samples of a builtin family at ``count`` uniform native parameters."""
    theta = 2.0 * np.pi * np.arange(count) / count
    params = dict(params or {})
    if name == "circle":
        r = float(params.get("radius", 1.0))
        pts = np.zeros((count, dimension))
        pts[:, 0], pts[:, 1] = r * np.cos(theta), r * np.sin(theta)
        return pts + _center(params, dimension), False
    if name == "ellipse":
        a, b = float(params.get("a", 2.0)), float(params.get("b", 1.0))
        pts = np.zeros((count, dimension))
        pts[:, 0], pts[:, 1] = a * np.cos(theta), b * np.sin(theta)
        return pts + _center(params, dimension), False
    if name == "tilted_circle":
        if dimension < 3:
            raise ValidationError("tilted_circle needs dimension >= 3")
        r = float(params.get("radius", 1.0))
        tilt = float(params.get("tilt", np.pi / 6))
        pts = np.zeros((count, dimension))
        pts[:, 0] = r * np.cos(theta)
        pts[:, 1] = r * np.sin(theta) * np.cos(tilt)
        pts[:, 2] = r * np.sin(theta) * np.sin(tilt)
        return pts + _center(params, dimension), False
    if name == "skew_quad":
        if dimension < 3:
            raise ValidationError("skew_quad needs dimension >= 3")
        h = float(params.get("height", 1.0))
        corners = np.zeros((4, dimension))
        corners[:, :3] = [[1, 0, 0], [0, 1, h], [-1, 0, 0], [0, -1, h]]
        return corners + _center(params, dimension), True
    if name == "fourier_curve":
        a = np.atleast_2d(np.asarray(params.get("a", [[1.0, 0.0]]), dtype=float))
        b = np.atleast_2d(np.asarray(params.get("b", [[0.0, 1.0]]), dtype=float))
        pts = np.zeros((count, dimension))
        for k, coef in enumerate(a, start=1):
            pts[:, : coef.size] += np.outer(np.cos(k * theta), coef)
        for k, coef in enumerate(b, start=1):
            pts[:, : coef.size] += np.outer(np.sin(k * theta), coef)
        return pts + _center(params, dimension), False
    raise ValidationError(f"unknown builtin {name!r}; expected one of {BUILTINS}")


def builtin_contour(name, params=None, dimension=None, samples=DEFAULT_SAMPLES):
    """Contour from one of the analytic families in :data:`BUILTINS`."""
    params = dict(params or {})
    if dimension is None:
        dimension = 3 if name in ("tilted_circle", "skew_quad") else 2
    pts, polygon = builtin_points(name, params, dimension, _OVERSAMPLE * samples)
    source = {"kind": "builtin", "name": name, "params": params}
    return make_contour(pts, samples=samples, polygon=polygon, source=source)


# -- spec files -------------------------------------------------------------

def parse_contour_spec(spec):
    """Build a Contour from a decoded ContourSpec mapping."""
    if not isinstance(spec, dict):
        raise ParseError("contour spec must be a JSON object")
    try:
        dimension = int(spec["dimension"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("contour spec needs an integer 'dimension'") from None
    if dimension < 2:
        raise ValidationError("dimension must be >= 2")
    samples = int(spec.get("samples", DEFAULT_SAMPLES))
    if "builtin" in spec:
        return builtin_contour(spec["builtin"], spec.get("params", {}), dimension, samples)
    if "points" not in spec:
        raise ParseError("contour spec needs either 'points' or 'builtin'")
    try:
        pts = np.asarray(spec["points"], dtype=float)
    except (TypeError, ValueError):
        raise ParseError("'points' must be a list of numeric coordinate lists") from None
    if pts.ndim != 2 or pts.shape[1] != dimension:
        raise ParseError(f"'points' must be a list of {dimension}-vectors")
    return make_contour(
        pts, samples=samples, polygon=bool(spec.get("polygon", False)),
        source={"kind": "file"},
    )


def read_contour_spec(path):
    """Load a ContourSpec file, returning ``(contour, config_block)``."""
    path = Path(path)
    try:
        spec = json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    contour = parse_contour_spec(spec)
    return contour, dict(spec.get("config", {}) or {})


def load_contour(path):
    """Load, validate and resample a contour from a ContourSpec JSON file."""
    return read_contour_spec(path)[0]


def as_contour(obj, samples=None):
    """Coerce a Contour or an (M, n) point array into a Contour."""
    if isinstance(obj, Contour):
        return obj
    from sklearn.utils import check_array

    pts = check_array(obj, ensure_min_samples=4, ensure_min_features=2)
    return make_contour(pts, samples=samples or len(pts))
