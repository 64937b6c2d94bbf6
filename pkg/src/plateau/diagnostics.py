"""Checks that certify a candidate surface independently of the solver."""

from dataclasses import dataclass

import numpy as np

from .exceptions import MismatchedContour
from .harmonic import DEFAULT_GRID, grid_fundamental_form


@dataclass(frozen=True)
class ConformalityDefect:
    """``iint |F|`` and ``iint (sqrt E - sqrt G)^2`` over the disc."""

    f_defect: float
    eg_defect: float

    @property
    def total(self):
        return self.f_defect + self.eg_defect


def _defect_from_form(fff, w):
    f_def = float(np.sum(w * np.abs(fff.F)))
    eg = np.sqrt(np.maximum(fff.E, 0.0)) - np.sqrt(np.maximum(fff.G, 0.0))
    return ConformalityDefect(f_def, float(np.sum(w * eg * eg)))


def conformality_defect(h, grid=DEFAULT_GRID):
    """Both conformality defects of a harmonic map by polar quadrature."""
    fff, w = grid_fundamental_form(h, grid)
    return _defect_from_form(fff, w)


@dataclass(frozen=True)
class EnergyAreaChain:
    dirichlet: float
    area: float
    gap: float

    def __iter__(self):
        return iter((self.dirichlet, self.area, self.gap))


def _chain_from_form(fff, w):
    dirichlet = float(0.5 * np.sum(w * (fff.E + fff.G)))
    area = float(np.sum(w * np.sqrt(np.maximum(fff.det, 0.0))))
    return EnergyAreaChain(dirichlet, area, dirichlet - area)


def energy_area_chain(h, grid=DEFAULT_GRID):
    """Dirichlet energy, area, and their gap on one shared quadrature grid.

    Pointwise ``(E + G)/2 >= sqrt(EG - F^2)``, so the gap is non-negative up
    to rounding and vanishes only for conformal maps.
    """
    fff, w = grid_fundamental_form(h, grid)
    return _chain_from_form(fff, w)


def certify(h, grid=DEFAULT_GRID):
    """Defects and energy/area chain from a single grid evaluation."""
    fff, w = grid_fundamental_form(h, grid)
    return _defect_from_form(fff, w), _chain_from_form(fff, w)


_COMPARED = ("douglas_energy", "dirichlet_energy", "area", "f_defect", "eg_defect")


def compare_solutions(a, b):
    """Field-by-field difference of two solve reports for the same contour.

    Reports are :class:`~plateau.solver.SolveReport` objects or their dict
    form.  ``distinct`` is set when the energies differ by more than the
    two reports' energy tolerances combined.
    """
    a = a if isinstance(a, dict) else a.to_dict()
    b = b if isinstance(b, dict) else b.to_dict()
    if a.get("contour_id") != b.get("contour_id"):
        raise MismatchedContour("reports were computed for different contours")
    diff = {k: float(b[k]) - float(a[k]) for k in _COMPARED if k in a and k in b}
    tol = float(a["tolerances"]["energy"]) + float(b["tolerances"]["energy"])
    return {
        "diff": diff,
        "energy_tolerance": tol,
        "distinct": abs(diff.get("dirichlet_energy", 0.0)) > tol,
    }
