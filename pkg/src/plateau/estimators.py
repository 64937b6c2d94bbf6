"""scikit-learn style front end.

``fit`` takes a contour (an (M, n) point array or a :class:`Contour`) and
solves for the spanning surface; ``transform`` maps parameter-domain points
``(u, v)`` to surface points.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .annulus import solve_two_contours
from .contour import Contour, as_contour
from .exceptions import ValidationError
from .harmonic import eval_harmonic, first_fundamental_form
from .solver import SolverConfig, riemann_map, solve_plateau


def _check_contour(X):
    if isinstance(X, Contour):
        return X
    pts = check_array(X, ensure_min_samples=8, ensure_min_features=2)
    return as_contour(pts)


class DouglasPlateau(TransformerMixin, BaseEstimator):
    """Minimal disc spanning a closed contour, found by minimising Douglas's functional.

    Parameters mirror :class:`~plateau.solver.SolverConfig`.

    Attributes
    ----------
    disc_ : HarmonicDisc
    reparameterization_ : Reparameterization
    report_ : SolveReport
    contour_ : Contour
    n_features_in_ : int
        Ambient dimension of the contour.
    """

    def __init__(self, n_nodes=256, max_degree=None, max_iters=3000, grad_tol=1e-9,
                 defect_tol=1e-4, weights="spectral", restarts=0, seed=None, strict=False):
        self.n_nodes = n_nodes
        self.max_degree = max_degree
        self.max_iters = max_iters
        self.grad_tol = grad_tol
        self.defect_tol = defect_tol
        self.weights = weights
        self.restarts = restarts
        self.seed = seed
        self.strict = strict

    def _config(self):
        return SolverConfig(
            n_nodes=self.n_nodes, max_degree=self.max_degree, max_iters=self.max_iters,
            grad_tol=self.grad_tol, defect_tol=self.defect_tol, weights=self.weights,
            restarts=self.restarts, seed=self.seed,
        )

    def _solve(self, contour, cfg):
        return solve_plateau(contour, cfg, strict=self.strict)

    def fit(self, X, y=None):
        contour = _check_contour(X)
        sol = self._solve(contour, self._config())
        self.contour_ = contour
        self.disc_ = sol.disc
        self.reparameterization_ = sol.reparameterization
        self.report_ = sol.report
        self.n_features_in_ = contour.dimension
        return self

    def _disc_points(self, X):
        check_is_fitted(self, "disc_")
        X = check_array(X, ensure_min_samples=1)
        if X.shape[1] != 2:
            raise ValidationError(f"expected (u, v) pairs, got {X.shape[1]} columns")
        return X

    def transform(self, X):
        """Surface points at disc points ``X`` of shape (k, 2)."""
        X = self._disc_points(X)
        return eval_harmonic(self.disc_, X[:, 0], X[:, 1])

    def fundamental_form(self, X):
        X = self._disc_points(X)
        return first_fundamental_form(self.disc_, X[:, 0], X[:, 1])

    def score(self, X=None, y=None):
        """Negative Dirichlet energy of the fitted surface (higher is better)."""
        check_is_fitted(self, "report_")
        return -self.report_.dirichlet_energy


class RiemannMap(DouglasPlateau):
    """Conformal map of the unit disc onto a planar Jordan domain.

    Fitting raises :class:`~plateau.exceptions.UnivalencyFailure` when the
    argument-principle check fails; ``univalency_`` holds the check.
    """

    def __init__(self, n_nodes=256, max_degree=None, max_iters=3000, grad_tol=1e-9,
                 defect_tol=1e-4, weights="spectral", restarts=0, seed=None, strict=False,
                 n_grid=10):
        super().__init__(n_nodes, max_degree, max_iters, grad_tol, defect_tol, weights,
                         restarts, seed, strict)
        self.n_grid = n_grid

    def _solve(self, contour, cfg):
        if contour.dimension != 2:
            raise ValidationError("RiemannMap needs planar points")
        sol, self.univalency_ = riemann_map(contour, cfg, n_grid=self.n_grid, strict=self.strict)
        return sol


class TwoContourPlateau(TransformerMixin, BaseEstimator):
    """Minimal annulus between two contours.

    ``fit(X, y)`` takes the outer contour as ``X`` and the inner one as ``y``;
    ``transform`` maps points of ``modulus_ <= |z| <= 1`` to the surface.
    """

    def __init__(self, n_nodes=128, max_degree=None, grad_tol=1e-9, defect_tol=1e-4,
                 modulus_bracket=(0.05, 0.95), modulus_tol=1e-4, modulus_search="golden"):
        self.n_nodes = n_nodes
        self.max_degree = max_degree
        self.grad_tol = grad_tol
        self.defect_tol = defect_tol
        self.modulus_bracket = modulus_bracket
        self.modulus_tol = modulus_tol
        self.modulus_search = modulus_search

    def fit(self, X, y):
        outer, inner = _check_contour(X), _check_contour(y)
        cfg = SolverConfig(
            n_nodes=self.n_nodes, max_degree=self.max_degree, grad_tol=self.grad_tol,
            defect_tol=self.defect_tol, modulus_bracket=tuple(self.modulus_bracket),
            modulus_tol=self.modulus_tol, modulus_search=self.modulus_search,
        )
        sol = solve_two_contours(outer, inner, cfg)
        self.solution_ = sol
        self.modulus_ = sol.modulus
        self.report_ = sol.report
        self.n_features_in_ = outer.dimension
        return self

    def transform(self, X):
        check_is_fitted(self, "solution_")
        X = check_array(X, ensure_min_samples=1)
        if X.shape[1] != 2:
            raise ValidationError(f"expected (u, v) pairs, got {X.shape[1]} columns")
        return self.solution_.surface.values(X[:, 0] + 1j * X[:, 1])


__all__ = ["DouglasPlateau", "RiemannMap", "TwoContourPlateau"]
