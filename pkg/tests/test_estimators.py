import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from plateau.contour import builtin_contour
from plateau.estimators import DouglasPlateau, RiemannMap, TwoContourPlateau
from plateau.exceptions import ValidationError

TH = 2 * np.pi * np.arange(200) / 200
ELLIPSE = np.c_[2 * np.cos(TH), np.sin(TH)]


def test_params_and_clone():
    est = DouglasPlateau(n_nodes=64, restarts=2)
    params = est.get_params()
    assert params["n_nodes"] == 64 and params["restarts"] == 2
    other = clone(est).set_params(n_nodes=32)
    assert other.n_nodes == 32 and est.n_nodes == 64
    assert RiemannMap(n_grid=5).get_params()["n_grid"] == 5


def test_not_fitted():
    with pytest.raises(NotFittedError):
        DouglasPlateau().transform(np.zeros((1, 2)))


def test_fit_transform_planar_circle():
    circle = np.c_[np.cos(TH), np.sin(TH)]
    est = DouglasPlateau(n_nodes=64).fit(circle)
    assert est.n_features_in_ == 2
    uv = np.array([[0.0, 0.0], [0.3, -0.2], [0.999, 0.0]])
    out = est.transform(uv)
    assert out.shape == (3, 2)
    # the disc map onto a round disc is a rotation of the identity
    assert np.allclose(np.linalg.norm(out, axis=1), np.linalg.norm(uv, axis=1), atol=1e-6)
    assert est.score() == pytest.approx(-np.pi, rel=1e-8)
    form = est.fundamental_form(uv)
    assert np.allclose(form.E, form.G) and np.allclose(form.F, 0, atol=1e-8)
    with pytest.raises(ValidationError):
        est.transform(np.zeros((2, 3)))


def test_fit_accepts_contour():
    c = builtin_contour("tilted_circle", {}, 3)
    est = DouglasPlateau(n_nodes=64).fit(c)
    assert est.contour_ is c and est.report_.converged
    assert est.report_.dirichlet_energy == pytest.approx(np.pi, rel=1e-7)


def test_riemann_map():
    est = RiemannMap(n_nodes=128, n_grid=6).fit(ELLIPSE)
    assert est.univalency_.univalent
    # three-point normalisation, so the centre maps to some interior point
    x, y = est.transform(np.zeros((1, 2)))[0]
    assert (x / 2) ** 2 + y**2 < 1
    with pytest.raises(ValidationError):
        RiemannMap().fit(np.c_[ELLIPSE, np.zeros(len(TH))])


def test_two_contour_plateau():
    outer = np.c_[np.cos(TH), np.sin(TH)]
    inner = 0.4 * outer
    est = TwoContourPlateau(n_nodes=64).fit(outer, inner)
    assert est.modulus_ == pytest.approx(0.4, abs=1e-3)
    pts = est.transform(np.array([[0.7, 0.0]]))
    assert np.linalg.norm(pts[0]) == pytest.approx(0.7, abs=1e-3)
