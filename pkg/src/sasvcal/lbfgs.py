"""Limited-memory BFGS with a strong-Wolfe line search.

Deterministic, dependency-free apart from numpy.  The line search follows
the bracketing/zoom scheme of Nocedal & Wright (Algorithms 3.5 and 3.6) with
safeguarded cubic interpolation.  Every accepted step satisfies
``f_new <= f_old``, so the recorded objective trace is non-increasing.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FunGrad = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


@dataclass
class LbfgsResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    nit: int
    nfev: int
    converged: bool
    message: str
    trace: list = field(default_factory=list)


class _Counter:
    def __init__(self, fg):
        self.fg = fg
        self.n = 0

    def __call__(self, x):
        self.n += 1
        f, g = self.fg(x)
        return float(f), np.asarray(g, dtype=float)


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), or None."""
    if a == b:
        return None
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if not disc >= 0:
        return None
    d2 = math.copysign(math.sqrt(disc), b - a)
    denom = db - da + 2.0 * d2
    if denom == 0:
        return None
    x = b - (b - a) * (db + d2 - d1) / denom
    return x if math.isfinite(x) else None


def strong_wolfe(fg, x, f0, g0, d, a_init, c1=1e-4, c2=0.9, max_evals=40, a_max=1e10):
    """Step length satisfying the strong Wolfe conditions along ``d``.

    Returns ``(alpha, f, g)`` or ``None`` if no step with ``f < f0`` was found.
    If the evaluation budget runs out, falls back to the best strictly
    decreasing point seen.
    """
    dphi0 = float(g0 @ d)
    best = None
    evals = 0

    def phi(a):
        nonlocal best, evals
        evals += 1
        f, g = fg(x + a * d)
        if math.isfinite(f) and f < f0 and (best is None or f < best[1]):
            best = (a, f, g)
        return f, g, float(g @ d)

    def armijo_fails(a, f):
        return f > f0 + c1 * a * dphi0

    def zoom(lo, f_lo, d_lo, hi, f_hi, d_hi):
        while evals < max_evals:
            width = hi - lo
            a = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi) if math.isfinite(f_hi) else None
            if a is None or not (min(lo, hi) + 0.1 * abs(width) <= a <= max(lo, hi) - 0.1 * abs(width)):
                a = lo + 0.5 * width
            if a == lo or a == hi:
                break
            f, g, dp = phi(a)
            if not math.isfinite(f) or armijo_fails(a, f) or f >= f_lo:
                hi, f_hi, d_hi = a, f, dp
                continue
            if abs(dp) <= -c2 * dphi0:
                return a, f, g
            if dp * (hi - lo) >= 0:
                hi, f_hi, d_hi = lo, f_lo, d_lo
            lo, f_lo, d_lo = a, f, dp
        return best

    a_prev, f_prev, d_prev = 0.0, f0, dphi0
    a = a_init
    while evals < max_evals:
        f, g, dp = phi(a)
        if not math.isfinite(f):
            # overshoot into a non-finite region: bracket with the last good point
            return zoom(a_prev, f_prev, d_prev, a, f, dp)
        if armijo_fails(a, f) or (a_prev > 0 and f >= f_prev):
            return zoom(a_prev, f_prev, d_prev, a, f, dp)
        if abs(dp) <= -c2 * dphi0:
            return a, f, g
        if dp >= 0:
            return zoom(a, f, dp, a_prev, f_prev, d_prev)
        a_prev, f_prev, d_prev = a, f, dp
        a = min(2.0 * a, a_max)
    return best


def _two_loop(g, pairs):
    q = -g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        al = rho * (s @ q)
        alphas.append(al)
        q -= al * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), al in zip(pairs, reversed(alphas)):
        be = rho * (y @ q)
        q += (al - be) * s
    return q


def minimize_lbfgs(
    fg: FunGrad,
    x0,
    gtol: float = 1e-8,
    max_iter: int = 1000,
    history: int = 10,
    c1: float = 1e-4,
    c2: float = 0.9,
    max_ls_evals: int = 40,
) -> LbfgsResult:
    """Minimize a smooth function given ``fg(x) -> (f, grad)``.

    Converges when the gradient infinity-norm drops below ``gtol``.  Stops
    early (``converged=False``) if a line search cannot decrease the
    objective even along steepest descent.
    """
    fg = _Counter(fg)
    x = np.array(x0, dtype=float)
    f, g = fg(x)
    trace = [f]
    pairs = deque(maxlen=history)
    message = "iteration limit reached"
    nit = 0
    converged = False

    while True:
        if not math.isfinite(f) or not np.all(np.isfinite(g)):
            message = "non-finite objective or gradient"
            break
        if np.max(np.abs(g)) < gtol:
            converged = True
            message = "gradient infinity-norm below tolerance"
            break
        if nit >= max_iter:
            break

        d = _two_loop(g, pairs)
        if not g @ d < 0:
            pairs.clear()
            d = -g
        a_init = 1.0 if pairs else min(1.0, 1.0 / max(np.sum(np.abs(g)), 1e-300))
        step = strong_wolfe(fg, x, f, g, d, a_init, c1=c1, c2=c2, max_evals=max_ls_evals)
        if step is None and pairs:
            pairs.clear()
            d = -g
            a_init = min(1.0, 1.0 / max(np.sum(np.abs(g)), 1e-300))
            step = strong_wolfe(fg, x, f, g, d, a_init, c1=c1, c2=c2, max_evals=max_ls_evals)
        if step is None:
            message = "line search could not decrease the objective"
            break

        a, f_new, g_new = step
        s = a * d
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * float(y @ y) and sy > 0:
            pairs.append((s, y, 1.0 / sy))
        x = x + s
        f, g = f_new, g_new
        trace.append(f)
        nit += 1

    return LbfgsResult(x=x, fun=f, grad=g, nit=nit, nfev=fg.n, converged=converged,
                       message=message, trace=trace)
