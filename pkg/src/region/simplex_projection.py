# src/region/simplex_projection.py
"""
Euclidean projections used by both policy optimizers

  - project_rows_to_simplex: every slice along the last axis onto
    {x >= floor, sum(x) = total} (discrete input policies)
  - project_weighted_simplex: onto {x >= 0, sum(w * x) = budget} in a
    diagonal metric (average-power constraints)

Both use the sort-and-threshold method.
"""

from typing import Optional

import numpy as np


def project_rows_to_simplex(Y: np.ndarray, total: float = 1.0, floor: float = 0.0) -> np.ndarray:
    """
    Project each slice along the last axis onto a (floored) simplex

    Args:
        Y: array of any shape, projected along axis -1
        total: required slice sum
        floor: lower bound on every entry (floor * m < total)

    Returns:
        array of the same shape
    """
    Y = np.asarray(Y, dtype=np.float64)
    m = Y.shape[-1]
    budget = total - m * floor
    if budget < 0:
        raise ValueError(f"floor {floor} too large for {m} entries summing to {total}")
    shifted = Y - floor
    u = -np.sort(-shifted, axis=-1)
    css = np.cumsum(u, axis=-1) - budget
    idx = np.arange(1, m + 1)
    rho = np.count_nonzero(u - css / idx > 0, axis=-1)
    rho = np.maximum(rho, 1)
    theta = np.take_along_axis(css, (rho - 1)[..., None], axis=-1) / rho[..., None]
    excess = np.maximum(shifted - theta, 0.0)
    # cancellation in shifted - theta grows with |Y|; rescale so every slice sums to total
    mass = excess.sum(axis=-1, keepdims=True)
    excess = np.divide(excess * budget, mass, out=np.full_like(excess, budget / m), where=mass > 0)
    return np.clip(excess + floor, floor, total)


def project_weighted_simplex(
    z: np.ndarray,
    w: np.ndarray,
    budget: float,
    metric: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Solve min sum_i m_i (x_i - z_i)^2 subject to x >= 0, sum_i w_i x_i = budget

    The solution is x_i = max(z_i - lam * w_i / m_i, 0) with the multiplier
    lam found from the sorted breakpoints z_i m_i / w_i. Entries with
    w_i == 0 are set to 0.

    Args:
        z: point to project, shape (n,)
        w: nonnegative constraint weights, shape (n,)
        budget: right-hand side (>= 0)
        metric: positive diagonal metric m (default all ones)

    Returns:
        projected point, shape (n,)
    """
    z = np.asarray(z, dtype=np.float64).ravel()
    w = np.asarray(w, dtype=np.float64).ravel()
    m = np.ones_like(z) if metric is None else np.asarray(metric, dtype=np.float64).ravel()
    x = np.zeros_like(z)
    live = w > 0
    if budget <= 0 or not np.any(live):
        return x

    zl, wl, ml = z[live], w[live], m[live]
    r = wl / ml
    breakpoints = zl / r
    order = np.argsort(-breakpoints, kind="stable")
    lam = (np.cumsum(wl[order] * zl[order]) - budget) / np.cumsum(wl[order] * r[order])
    valid = np.nonzero(breakpoints[order] > lam)[0]
    j = valid[-1] if valid.size else 0
    x[live] = np.maximum(zl - lam[j] * r, 0.0)
    return x
