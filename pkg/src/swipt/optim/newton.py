"""Safeguarded Newton maximization of concave scalar functions on an interval."""

from __future__ import annotations

import numpy as np


def newton_maximize_scalar(fprime, fsecond, lower, upper, tol=1e-9, xtol=1e-14, max_iter=100, edge=1e-12):
    """Maximize a concave function on ``[lower, upper]`` given its first two derivatives.

    Works elementwise on arrays, so many independent problems can be solved at once:
    ``fprime`` and ``fsecond`` receive an array of the broadcast shape of the bounds
    (entries not currently being refined are NaN) and return arrays of that shape.
    Iterates stay inside a bracket on the sign change of ``fprime``; a Newton step
    that leaves the bracket, or a non-negative second derivative, falls back to
    bisection.  Evaluations are clamped to ``upper - edge * (upper - lower)`` so a
    derivative that diverges at the right end is never evaluated there.

    Stops per element once ``|fprime| <= tol`` or the bracket has shrunk by ``xtol``.
    """
    scalar = np.ndim(lower) == 0 and np.ndim(upper) == 0
    lo, hi = np.broadcast_arrays(np.atleast_1d(np.asarray(lower, dtype=float)), np.atleast_1d(np.asarray(upper, dtype=float)))
    lo, hi = lo.astype(float).copy(), hi.astype(float).copy()
    n = lo.size
    hi_eval = hi - edge * (hi - lo)

    def call(fn, pos, vals):
        full = np.full(n, np.nan)
        full[pos] = vals
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.broadcast_to(np.asarray(fn(full if not scalar else full[0]), dtype=float), (n,))
        return out[pos]

    everything = np.arange(n)
    d_lo = call(fprime, everything, lo)
    d_hi = call(fprime, everything, hi_eval)
    x = np.where(d_lo <= 0, lo, hi)
    pos = np.flatnonzero((d_lo > 0) & (d_hi < 0))

    a, b = lo[pos], hi_eval[pos]
    xi = 0.5 * (a + b)
    width0 = b - a
    active = np.ones(pos.size, dtype=bool)
    for _ in range(max_iter):
        sel = np.flatnonzero(active)
        if sel.size == 0:
            break
        xs = xi[sel]
        d1 = call(fprime, pos[sel], xs)
        d2 = call(fsecond, pos[sel], xs)
        done = np.abs(d1) <= tol
        rising = d1 > 0
        a[sel] = np.where(rising, xs, a[sel])
        b[sel] = np.where(rising, b[sel], xs)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xs - d1 / d2
        ok = (d2 < 0) & (step > a[sel]) & (step < b[sel])
        xi[sel] = np.where(done, xs, np.where(ok, step, 0.5 * (a[sel] + b[sel])))
        done |= (b[sel] - a[sel]) <= xtol * width0[sel]
        active[sel[done]] = False
    x[pos] = xi
    return float(x[0]) if scalar else x.reshape(np.broadcast(np.asarray(lower), np.asarray(upper)).shape)
