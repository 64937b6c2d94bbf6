"""Limited-memory BFGS with Armijo backtracking.

Small and deliberately plain: the energies here are smooth, cheap relative
to the dimension, and we want every accepted step to decrease the energy
so the recorded history is monotone.
"""

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    iterations: int
    success: bool
    message: str
    history: list = field(default_factory=list)


def lbfgs(fun, x0, grad_tol=1e-9, max_iters=2000, memory=10, init_step=1.0,
          backtrack=0.5, armijo=1e-4, max_backtracks=60, gradient_descent=False,
          flat=1e-14):
    """Minimise ``fun`` from ``x0``.

    ``fun(x)`` returns ``(f, g, measure)`` where ``g`` is the gradient in
    ``x`` and ``measure`` the stationarity number compared to ``grad_tol``
    (callers may measure stationarity in other coordinates than ``x``).
    History rows are ``(iteration, f, measure)``.  ``f`` never increases
    by more than ``flat * max(|f|, 1)`` per iteration.
    """
    x = np.array(x0, dtype=float)
    f, g, measure = fun(x)
    if not np.isfinite(f):
        raise ValueError("objective is not finite at the starting point")
    s_hist, y_hist = deque(maxlen=memory), deque(maxlen=memory)
    history = [(0, f, measure)]
    message = "max_iters reached"
    failures = 0
    it = 0
    for it in range(1, max_iters + 1):
        if measure < grad_tol:
            it -= 1
            message = "gradient tolerance met"
            break
        if gradient_descent or not s_hist:
            gmax = np.max(np.abs(g))
            d = -g * (init_step / gmax if gmax > 0 else 1.0)
        else:
            d = -_two_loop(g, s_hist, y_hist)
        slope = float(np.dot(g, d))
        if slope >= 0.0:
            s_hist.clear()
            y_hist.clear()
            d = -g / max(np.max(np.abs(g)), 1e-300)
            slope = float(np.dot(g, d))
        alpha = 1.0
        for _ in range(max_backtracks):
            x_new = x + alpha * d
            if np.array_equal(x_new, x):
                break
            f_new, g_new, m_new = fun(x_new)
            if np.isfinite(f_new) and f_new <= f + armijo * alpha * slope:
                break
            # near a minimum the decrease drops below the resolution of f;
            # then settle for a step that is flat to rounding and reduces
            # the stationarity measure
            if (np.isfinite(f_new) and abs(f_new - f) <= flat * max(abs(f), 1.0)
                    and m_new < measure):
                break
            alpha *= backtrack
        else:
            x_new = x
        if x_new is x or np.array_equal(x_new, x):
            failures += 1
            if failures > 1 or not s_hist:
                message = "line search failed"
                it -= 1
                break
            logger.debug("line search failed at iteration %d; resetting memory", it)
            s_hist.clear()
            y_hist.clear()
            continue
        failures = 0
        s, y = x_new - x, g_new - g
        sy = float(np.dot(s, y))
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
        else:
            s_hist.clear()
            y_hist.clear()
        x, f, g, measure = x_new, f_new, g_new, m_new
        history.append((it, f, measure))
    success = measure < grad_tol
    if success:
        message = "gradient tolerance met"
    return OptimizeResult(x, f, measure, it, success, message, history)


def _two_loop(g, s_hist, y_hist):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / np.dot(y, s)
        a = rho * np.dot(s, q)
        alphas.append((rho, a))
        q -= a * y
    s, y = s_hist[-1], y_hist[-1]
    q *= np.dot(s, y) / np.dot(y, y)
    for (s, y), (rho, a) in zip(zip(s_hist, y_hist), reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return q
