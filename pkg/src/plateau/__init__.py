"""Minimal surfaces spanning closed contours, by Douglas's boundary functional.

The unknown is the boundary correspondence between the unit circle and the
contour; the surface is the harmonic extension of the optimal trace.
"""

from .annulus import AnnulusSolution, solve_two_contours
from .contour import Contour, builtin_contour, contour_derivative, evaluate_contour, load_contour
from .diagnostics import compare_solutions, conformality_defect, energy_area_chain
from .douglas import (KernelTable, Reparameterization, douglas_energy, douglas_energy_spectral,
                      douglas_gradient, el_residual, kernel_table, log_sin_energy)
from .estimators import DouglasPlateau, RiemannMap, TwoContourPlateau
from .exceptions import (DegenerateContour, DegreeError, DomainError, MismatchedContour,
                         ModulusAtBracketEnd, NotConverged, ParseError, PlateauError,
                         PositivityWarning, UnivalencyFailure, ValidationError)
from .harmonic import (FourierBoundary, HarmonicDisc, PolarGrid, area, dirichlet_energy,
                       eval_harmonic, find_branch_points, first_fundamental_form, fit_fourier)
from .solver import SolveReport, SolverConfig, riemann_map, solve_plateau

__version__ = "0.1.0"
