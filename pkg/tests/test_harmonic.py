import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dirichlet_by_finite_differences, spectral_dirichlet
from plateau.exceptions import DegreeError, DomainError
from plateau.harmonic import (FourierBoundary, HarmonicDisc, PolarGrid, area, dirichlet_energy,
                              dirichlet_energy_quadrature, eval_harmonic, find_branch_points,
                              first_fundamental_form, fit_fourier, grid_fundamental_form,
                              poisson_extension, write_obj)

N = 256
THETA = 2 * np.pi * np.arange(N) / N


def disc_from(fn, n=N):
    th = 2 * np.pi * np.arange(n) / n
    return HarmonicDisc.from_trace(fn(th))


IDENTITY = disc_from(lambda t: np.c_[np.cos(t), np.sin(t)])
SQUARE = disc_from(lambda t: np.c_[np.cos(2 * t), np.sin(2 * t)])
CUBE = disc_from(lambda t: np.c_[np.cos(3 * t), np.sin(3 * t)])
CONSTANT = disc_from(lambda t: np.tile([0.3, -1.2], (len(t), 1)))
ANISO = disc_from(lambda t: np.c_[2 * np.cos(t), np.sin(t)])


def test_fit_circle_coefficients():
    fb = fit_fourier(np.c_[np.cos(THETA), np.sin(THETA)])
    assert np.allclose(fb.a[1], [1, 0], atol=1e-12)
    assert np.allclose(fb.b[1], [0, 1], atol=1e-12)
    rest = np.r_[fb.a[[0] + list(range(2, fb.max_degree + 1))].ravel(), fb.b[2:].ravel()]
    assert np.max(np.abs(rest)) < 1e-12
    assert fb.max_degree == N // 2 - 1


def test_fit_constant_and_double_angle():
    fb = fit_fourier(np.tile([0.5, 2.0], (N, 1)))
    assert np.allclose(fb.a[0], [1.0, 4.0], atol=1e-12)
    assert np.max(np.abs(fb.a[1:])) < 1e-12 and np.max(np.abs(fb.b)) < 1e-12
    fb = fit_fourier(np.c_[np.cos(2 * THETA), np.sin(2 * THETA)])
    assert np.allclose(fb.a[2], [1, 0], atol=1e-12) and np.allclose(fb.b[2], [0, 1], atol=1e-12)


def test_fit_degree_error():
    with pytest.raises(DegreeError):
        fit_fourier(np.zeros((10, 2)), max_degree=5)


def test_antialias_zeroes_top_modes():
    noisy = np.random.default_rng(0).standard_normal((64, 2))
    fb = fit_fourier(noisy, antialias=True)
    assert np.all(fb.a[29:] == 0) and np.all(fb.b[29:] == 0)


def test_eval_examples():
    assert np.allclose(eval_harmonic(IDENTITY, 0.0, 0.0), [0, 0], atol=1e-14)
    assert np.allclose(eval_harmonic(IDENTITY, 0.5, 0.0), [0.5, 0], atol=1e-14)
    rho, th = 0.7, 1.1
    z = rho * np.exp(1j * th)
    assert np.allclose(eval_harmonic(SQUARE, z.real, z.imag),
                       [rho**2 * np.cos(2 * th), rho**2 * np.sin(2 * th)], atol=1e-13)


def test_mean_value_property():
    fb = FourierBoundary(np.array([[0.4, -2.0], [1.0, 0.2], [0.3, 0.1]]),
                         np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 0.7]]))
    assert np.array_equal(eval_harmonic(HarmonicDisc(fb), 0.0, 0.0), 0.5 * fb.a[0])


def test_domain_error():
    with pytest.raises(DomainError):
        eval_harmonic(IDENTITY, 1.0, 0.0)
    with pytest.raises(DomainError):
        first_fundamental_form(IDENTITY, 0.8, 0.8)


def test_first_fundamental_form_examples():
    f = first_fundamental_form(IDENTITY, 0.3, -0.2)
    assert np.allclose([f.E, f.F, f.G], [1, 0, 1], atol=1e-12)
    rho = 0.6
    f = first_fundamental_form(SQUARE, rho * np.cos(0.4), rho * np.sin(0.4))
    assert np.allclose([f.E, f.F, f.G], [4 * rho**2, 0, 4 * rho**2], atol=1e-12)
    f = first_fundamental_form(CONSTANT, 0.1, 0.2)
    assert np.allclose([f.E, f.F, f.G], 0, atol=1e-14)


def test_derivatives_second_order_in_step():
    g = np.random.default_rng(3)
    disc = HarmonicDisc(FourierBoundary(g.standard_normal((7, 3)), g.standard_normal((7, 3))))
    u, v = 0.51, -0.37
    ru, _ = disc.derivatives(np.array(u + 1j * v))
    errs = []
    for h in (4e-2, 2e-2, 1e-2):
        fd = (eval_harmonic(disc, u + h, v) - eval_harmonic(disc, u - h, v)) / (2 * h)
        errs.append(np.max(np.abs(fd - ru)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


def test_discrete_laplacian_vanishes():
    h = 1e-3
    for z in (0.2 + 0.1j, -0.5 + 0.3j):
        vals = [SQUARE.values(np.array(z + d)) for d in (h, -h, 1j * h, -1j * h, 0)]
        lap = (vals[0] + vals[1] + vals[2] + vals[3] - 4 * vals[4]) / h**2
        assert np.max(np.abs(lap)) < 1e-6


def test_boundary_limit_matches_trace():
    th = np.linspace(0, 2 * np.pi, 7)
    inner = ANISO.values(0.999999 * np.exp(1j * th))
    assert np.allclose(inner, ANISO.boundary.trace(th), atol=1e-5)


def test_dirichlet_examples():
    assert dirichlet_energy(IDENTITY) == pytest.approx(np.pi, abs=1e-12)
    assert dirichlet_energy(SQUARE) == pytest.approx(2 * np.pi, abs=1e-12)
    assert dirichlet_energy(CONSTANT) == pytest.approx(0.0, abs=1e-20)
    # quadrature oracles, independent of the package
    assert dirichlet_by_finite_differences(IDENTITY.values) == pytest.approx(np.pi, rel=1e-4)
    assert dirichlet_by_finite_differences(SQUARE.values) == pytest.approx(2 * np.pi, rel=1e-4)


def test_spectral_and_quadrature_dirichlet_agree(rng):
    grid = PolarGrid(256, 128)
    for _ in range(5):
        k = 16
        a, b = rng.standard_normal((k, 3)) / np.arange(1, k + 1)[:, None], rng.standard_normal(
            (k, 3)) / np.arange(1, k + 1)[:, None]
        fb = FourierBoundary(np.vstack([np.zeros(3), a]), np.vstack([np.zeros(3), b]))
        d = HarmonicDisc(fb)
        assert dirichlet_energy(d) == pytest.approx(spectral_dirichlet(a, b), rel=1e-14)
        assert abs(dirichlet_energy_quadrature(d, grid) - dirichlet_energy(d)) < 1e-8


def test_area_examples():
    assert area(IDENTITY) == pytest.approx(np.pi, abs=1e-6)
    assert area(SQUARE) == pytest.approx(2 * np.pi, abs=1e-4)
    assert area(CONSTANT) == 0.0


def test_area_reports_clipped_radicands():
    _, clipped = area(CONSTANT, return_clipped=True)
    assert clipped >= 0
    value, clipped = area(IDENTITY, return_clipped=True)
    assert clipped == 0


def test_grid_form_matches_pointwise_form():
    grid = PolarGrid(32, 6)
    fff, _ = grid_fundamental_form(ANISO, grid)
    z, _ = grid.nodes()
    pt = first_fundamental_form(ANISO, z.real, z.imag)
    assert np.allclose(fff.E, pt.E) and np.allclose(fff.F, pt.F) and np.allclose(fff.G, pt.G)


def test_grid_form_folds_high_degree():
    # degree far above n_theta is still sampled exactly
    grid = PolarGrid(8, 4)
    disc = disc_from(lambda t: np.c_[np.cos(20 * t), np.sin(20 * t)], n=64)
    fff, _ = grid_fundamental_form(disc, grid)
    z, _ = grid.nodes()
    pt = first_fundamental_form(disc, z.real, z.imag)
    assert np.allclose(fff.E, pt.E, rtol=1e-10, atol=1e-14)


def test_branch_points():
    pts = find_branch_points(SQUARE)
    assert len(pts) == 1 and np.hypot(pts[0].u, pts[0].v) < 1.9 / 80
    assert find_branch_points(IDENTITY) == []
    pts = find_branch_points(CUBE)
    assert len(pts) == 1 and np.hypot(pts[0].u, pts[0].v) < 1.9 / 80
    assert find_branch_points(CONSTANT) == []


def test_poisson_extension_cross_check():
    trace = np.c_[np.cos(THETA) + 0.2 * np.sin(3 * THETA), np.sin(THETA)]
    disc = HarmonicDisc.from_trace(trace)
    for u, v in ((0.1, 0.2), (-0.4, 0.5)):
        assert np.allclose(poisson_extension(trace, u, v), eval_harmonic(disc, u, v), atol=1e-10)


def test_write_obj(tmp_path):
    files = write_obj(IDENTITY, tmp_path / "s.obj", n_rho=4, n_theta=8)
    lines = (tmp_path / "s.obj").read_text().splitlines()
    assert sum(ln.startswith("v ") for ln in lines) == 1 + 4 * 8
    assert sum(ln.startswith("f ") for ln in lines) == 8 + 2 * 8 * 3
    assert len(files) == 1
    disc4 = disc_from(lambda t: np.c_[np.cos(t), np.sin(t), 0 * t, np.cos(2 * t)])
    files = write_obj(disc4, tmp_path / "s4.obj", n_rho=2, n_theta=4)
    assert len(files) == 2 and files[1].suffix == ".csv"
    rows = files[1].read_text().splitlines()
    assert rows[0] == "x0,x1,x2,x3" and len(rows) == 1 + 1 + 2 * 4


coef = st.lists(st.floats(-1, 1), min_size=12, max_size=12)


@settings(max_examples=30, deadline=None)
@given(coef)
def test_energy_dominates_area(c):
    a = np.array(c[:6]).reshape(3, 2)
    b = np.array(c[6:]).reshape(3, 2)
    fb = FourierBoundary(np.vstack([np.zeros(2), a]), np.vstack([np.zeros(2), b]))
    d = HarmonicDisc(fb)
    assert area(d) <= dirichlet_energy(d) + 1e-9


@settings(max_examples=30, deadline=None)
@given(coef)
def test_fit_reproduces_trig_polynomials(c):
    a = np.array(c[:6]).reshape(3, 2)
    b = np.array(c[6:]).reshape(3, 2)
    th = 2 * np.pi * np.arange(16) / 16
    tr = sum(np.outer(np.cos((k + 1) * th), a[k]) + np.outer(np.sin((k + 1) * th), b[k])
             for k in range(3))
    fb = fit_fourier(tr, max_degree=3)
    assert np.allclose(fb.a[1:], a, atol=1e-12) and np.allclose(fb.b[1:], b, atol=1e-12)
    assert fb.truncation_error < 1e-12
