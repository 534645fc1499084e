"""One-dimensional maximization: coarse grid scan refined by golden-section search."""

from __future__ import annotations

import math

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-6, max_iter: int = 200):
    """Maximize a unimodal scalar function on ``[lo, hi]``.

    Returns ``(x, f(x))``. The bracket endpoints are compared against the
    interior optimum so a monotone function returns the better endpoint.
    """
    if hi < lo:
        lo, hi = hi, lo
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    x_best, f_best = (x1, f1) if f1 >= f2 else (x2, f2)
    for x_end in (lo, hi):
        f_end = f(x_end)
        if f_end > f_best:
            x_best, f_best = x_end, f_end
    return float(x_best), float(f_best)


def grid_golden_max(f_vec, lo: float, hi: float, n_grid: int = 512, tol: float = 1e-6, f_scalar=None):
    """Global maximum of ``f_vec`` on ``[lo, hi]``.

    ``f_vec`` must accept an array. The best of ``n_grid`` samples seeds a
    golden-section refinement over its two neighbouring cells. Exact ties
    on the grid go to the sample nearest the interval centre.
    """
    if f_scalar is None:
        def f_scalar(x):
            return float(np.asarray(f_vec(np.array([x])))[0])

    grid = np.linspace(lo, hi, n_grid)
    values = np.asarray(f_vec(grid), dtype=float)
    values = np.where(np.isfinite(values), values, -np.inf)
    best = values.max()
    candidates = np.flatnonzero(values == best)
    centre = (lo + hi) / 2
    i = int(candidates[np.argmin(np.abs(grid[candidates] - centre))])
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n_grid - 1)]
    x, fx = golden_section_max(f_scalar, a, b, tol=tol)
    if fx < best:
        return float(grid[i]), float(best)
    return x, fx
