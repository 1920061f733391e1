"""Deep-cut ellipsoid method for convex minimization over a box."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class EllipsoidStatus:
    center: np.ndarray
    shape: np.ndarray
    iterations: int
    converged: bool
    value: float  # best objective found at a feasible point
    lower_bound: float  # certified lower bound on the minimum

    @property
    def gap(self) -> float:
        return self.value - self.lower_bound


def _cut(x, P, g, alpha):
    """Update ellipsoid {z : (z-x)^T P^-1 (z-x) <= 1} with the cut g^T (z - x) + alpha sqrt(g^T P g) <= 0."""
    n = x.size
    Pg = P @ g
    gPg = float(g @ Pg)
    gt = Pg / np.sqrt(gPg)
    if n == 1:
        # 1-D ellipsoid is an interval: keep the part where g (z - x) <= -alpha r
        r = np.sqrt(P[0, 0])
        lo, hi = x[0] - r, x[0] + r
        cut = x[0] - alpha * r * np.sign(g[0])
        if g[0] > 0:
            hi = cut
        else:
            lo = cut
        return np.array([0.5 * (lo + hi)]), np.array([[(0.5 * (hi - lo)) ** 2]])
    x_new = x - (1 + n * alpha) / (n + 1) * gt
    P_new = (n * n / (n * n - 1.0)) * (1 - alpha * alpha) * (P - 2 * (1 + n * alpha) / ((n + 1) * (1 + alpha)) * np.outer(gt, gt))
    return x_new, 0.5 * (P_new + P_new.T)


def ellipsoid_minimize(oracle, lower, upper, tol=1e-9, max_iter=None, constraint=None, rel_tol=0.0, callback=None):
    """Minimize a convex function over the box ``lower <= x <= upper``.

    Parameters
    ----------
    oracle : callable
        ``oracle(x) -> (value, subgradient)`` for a point inside the box.
    lower, upper : array_like
        Box bounds; the starting ellipsoid is the ball circumscribing the box.
    tol, rel_tol : float
        Stop once ``best - lower_bound <= max(tol, rel_tol * |best|)``.
    max_iter : int, optional
        Defaults to ``500 * m**2``.
    constraint : callable, optional
        Extra convex constraint ``c(x) <= 0``; ``constraint(x) -> (c, subgradient)``.
    callback : callable, optional
        Called as ``callback(x, value, subgradient)`` after each objective evaluation.

    Returns
    -------
    x_best : ndarray
        Best feasible point evaluated.
    status : EllipsoidStatus
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    m = lower.size
    if max_iter is None:
        max_iter = 500 * m * m
    x = 0.5 * (lower + upper)
    radius = 0.5 * np.linalg.norm(upper - lower)
    P = np.eye(m) * radius**2
    best_x, best_f, lower_bound = None, np.inf, -np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        # box feasibility cut on the most violated coordinate
        viol = np.maximum(lower - x, x - upper)
        i = int(np.argmax(viol))
        if viol[i] > 0:
            g = np.zeros(m)
            g[i] = 1.0 if x[i] > upper[i] else -1.0
            alpha = min(viol[i] / np.sqrt(P[i, i]), 0.999)
            x, P = _cut(x, P, g, alpha)
            continue
        if constraint is not None:
            c, g = constraint(x)
            g = np.asarray(g, dtype=float)
            if c > 0:
                gPg = float(g @ P @ g)
                if gPg <= 0:
                    break
                x, P = _cut(x, P, g, min(c / np.sqrt(gPg), 0.999))
                continue
        f, g = oracle(x)
        g = np.asarray(g, dtype=float)
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise FloatingPointError(f"oracle returned non-finite output at {x}")
        if callback is not None:
            callback(x, f, g)
        if f < best_f:
            best_x, best_f = x.copy(), f
        gPg = float(g @ P @ g)
        if gPg <= 0:
            # zero subgradient: x is a minimizer
            lower_bound = f
            converged = True
            break
        lower_bound = max(lower_bound, f - np.sqrt(gPg))
        if best_f - lower_bound <= max(tol, rel_tol * abs(best_f)):
            converged = True
            break
        alpha = min((f - best_f) / np.sqrt(gPg), 0.999)
        x, P = _cut(x, P, g, alpha)
    if best_x is None:
        raise RuntimeError("ellipsoid method never reached a feasible point")
    if not converged:
        log.warning("ellipsoid method stopped after %d iterations with gap %.3g", it, best_f - lower_bound)
    return best_x, EllipsoidStatus(x, P, it, converged, best_f, lower_bound)
