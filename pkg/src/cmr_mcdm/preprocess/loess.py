"""Locally weighted polynomial regression with tricube weights."""
from __future__ import annotations

from math import ceil

import numpy as np


class LoessError(ArithmeticError):
    """Raised when a local fit has no usable weighted design."""


def tricube(u: np.ndarray) -> np.ndarray:
    u = np.clip(np.abs(u), 0.0, 1.0)
    return (1.0 - u**3) ** 3


def loess_fit(x, y, x_eval, n_neighbors: int, degree: int = 1, weights=None,
              fallback: bool = False) -> np.ndarray:
    """Evaluate a loess fit of ``(x, y)`` at ``x_eval``.

    The neighbourhood radius at each evaluation point is the distance to the
    ``n_neighbors``-th nearest x. When ``n_neighbors`` exceeds the number of
    points the radius is widened by ``(n_neighbors - n) / 2`` beyond the
    farthest point, as in Cleveland et al. (1990), so very large windows tend
    to a globally (almost uniformly) weighted polynomial.

    ``weights`` multiplies the tricube weights (robustness weights).

    With ``fallback=True`` points whose local design is singular are refit
    with a lower degree, and points left with no weight ignore ``weights``,
    instead of raising.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x_eval = np.atleast_1d(np.asarray(x_eval, dtype=float))
    n = x.size
    if degree not in (0, 1, 2):
        raise ValueError("degree must be 0, 1 or 2")
    if n == 0:
        raise LoessError("no points to fit")
    if n_neighbors < 1:
        raise ValueError("n_neighbors must be >= 1")

    dist = np.abs(x_eval[:, None] - x[None, :])
    if n_neighbors <= n:
        radius = np.partition(dist, n_neighbors - 1, axis=1)[:, n_neighbors - 1]
    else:
        radius = dist.max(axis=1) + (n_neighbors - n) / 2.0
    radius = np.where(radius > 0, radius, np.nan)
    w = np.nan_to_num(tricube(dist / radius[:, None]), nan=0.0)
    if weights is not None:
        robust = w * np.asarray(weights, dtype=float)[None, :]
        if fallback:
            empty = robust.sum(axis=1) <= 0
            robust[empty] = w[empty]
        w = robust
    if np.any(w.sum(axis=1) <= 0):
        raise LoessError("all local weights are zero")

    fitted = np.full(x_eval.size, np.nan)
    todo = np.arange(x_eval.size)
    for deg in range(degree, -1, -1):
        values, ok = _local_poly(x, y, x_eval[todo], w[todo], deg)
        fitted[todo[ok]] = values[ok]
        todo = todo[~ok]
        if todo.size == 0:
            return fitted
        if not fallback:
            break
    raise LoessError("singular local design; too few distinct x in window")


def _local_poly(x, y, x_eval, w, degree):
    # centre each local design on its evaluation point; the fit is then the intercept
    dx = x[None, :] - x_eval[:, None]
    powers = np.stack([dx**k for k in range(degree + 1)], axis=-1)  # (m, n, p)
    gram = np.einsum("mn,mnp,mnq->mpq", w, powers, powers)
    rhs = np.einsum("mn,mnp,n->mp", w, powers, y)
    # rescale columns for conditioning
    scale = np.sqrt(np.clip(np.diagonal(gram, axis1=1, axis2=2), 1e-300, None))
    gram_s = gram / (scale[:, :, None] * scale[:, None, :])
    rhs_s = rhs / scale
    cond = np.linalg.cond(gram_s)
    ok = np.isfinite(cond) & (cond < 1e12)
    beta = np.zeros_like(rhs)
    if ok.any():
        beta[ok] = np.linalg.solve(gram_s[ok], rhs_s[ok][..., None])[..., 0] / scale[ok]
    return beta[:, 0], ok


def loess_smooth(x, y, span: float = 0.75, degree: int = 1, robustness_weights=None) -> np.ndarray:
    """Loess fitted values at each x, using the nearest ``ceil(span * n)`` points.

    Parameters
    ----------
    x, y : array_like
        Sample points.
    span : float
        Fraction of points in each local window, in (0, 1].
    degree : int
        Local polynomial degree, 0, 1 or 2.
    robustness_weights : array_like, optional
        Per-point multipliers of the tricube weights; a zero weight removes a
        point from every local fit.
    """
    if not 0 < span <= 1:
        raise ValueError("span must be in (0, 1]")
    x = np.asarray(x, dtype=float)
    q = max(1, ceil(span * x.size))
    return loess_fit(x, y, x, q, degree, robustness_weights)
