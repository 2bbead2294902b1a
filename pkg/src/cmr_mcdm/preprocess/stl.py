"""Seasonal-trend decomposition by loess (Cleveland et al., 1990)."""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import NamedTuple

import numpy as np

from .loess import loess_fit


class StlLengthError(ValueError):
    pass


def _next_odd(v: float) -> int:
    n = int(ceil(v))
    return n if n % 2 else n + 1


@dataclass(frozen=True)
class StlParams:
    """STL settings.

    ``seasonal_window=None`` selects a periodic seasonal component: each
    cycle-subseries is smoothed with a window far longer than the series.
    ``trend_window`` and ``lowpass_window`` default to Cleveland's choices.
    """

    seasonal_window: int | None = None
    trend_window: int | None = None
    lowpass_window: int | None = None
    seasonal_degree: int = 1
    trend_degree: int = 1
    lowpass_degree: int = 1
    inner_iterations: int = 2
    outer_iterations: int = 1

    def resolve(self, n: int, period: int) -> tuple[int, int, int]:
        ns = self.seasonal_window if self.seasonal_window is not None else 10 * n + 1
        if ns < 3 or ns % 2 == 0:
            raise ValueError("seasonal_window must be odd and >= 3")
        nt = self.trend_window or _next_odd(1.5 * period / (1.0 - 1.5 / ns))
        nl = self.lowpass_window or _next_odd(period)
        for name, v in (("trend_window", nt), ("lowpass_window", nl)):
            if v < 3 or v % 2 == 0:
                raise ValueError(f"{name} must be odd and >= 3")
        return ns, nt, nl

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class StlResult(NamedTuple):
    trend: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray
    weights: np.ndarray


def _moving_average(x: np.ndarray, length: int) -> np.ndarray:
    c = np.cumsum(np.concatenate(([0.0], x)))
    return (c[length:] - c[:-length]) / length


def _bisquare_weights(residual: np.ndarray) -> np.ndarray:
    h = 6.0 * np.median(np.abs(residual))
    if h == 0:
        return np.ones_like(residual)
    u = np.clip(np.abs(residual) / h, 0.0, 1.0)
    return (1.0 - u**2) ** 2


def _inner_loop(y, trend, weights, period, ns, nt, nl, params: StlParams):
    n = y.size
    t_idx = np.arange(n, dtype=float)
    detrended = y - trend

    # cycle-subseries smoothing, each extended by one cycle position at both ends
    cycle = np.empty(n + 2 * period)
    for k in range(period):
        pos = np.arange(k, n, period)
        sub_x = np.arange(pos.size, dtype=float)
        ext_x = np.arange(-1, pos.size + 1, dtype=float)
        fitted = loess_fit(sub_x, detrended[pos], ext_x, ns, params.seasonal_degree, weights[pos],
                           fallback=True)
        cycle[k::period][: pos.size + 2] = fitted
    # low-pass filter of the smoothed cycle-subseries
    low = _moving_average(cycle, period)
    low = _moving_average(low, period)
    low = _moving_average(low, 3)
    low = loess_fit(t_idx, low, t_idx, nl, params.lowpass_degree, fallback=True)
    seasonal = cycle[period:period + n] - low

    trend = loess_fit(t_idx, y - seasonal, t_idx, nt, params.trend_degree, weights, fallback=True)
    return trend, seasonal


def stl(values, period: int = 7, params: StlParams | None = None) -> StlResult:
    """Additive STL decomposition of an evenly spaced, gap-free series.

    The remainder is defined as ``values - trend - seasonal``, so the three
    components always sum back to the input.
    """
    params = params or StlParams()
    y = np.asarray(values, dtype=float)
    n = y.size
    if period < 2:
        raise ValueError("period must be >= 2")
    if n < 2 * period:
        raise StlLengthError(f"series of length {n} shorter than two periods ({2 * period})")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if params.inner_iterations < 1 or params.outer_iterations < 1:
        raise ValueError("iteration counts must be >= 1")
    ns, nt, nl = params.resolve(n, period)

    trend = np.zeros(n)
    weights = np.ones(n)
    seasonal = np.zeros(n)
    # the first outer pass uses unit weights; each later pass reweights
    for outer in range(params.outer_iterations):
        if outer > 0:
            weights = _bisquare_weights(y - trend - seasonal)
        for _ in range(params.inner_iterations):
            trend, seasonal = _inner_loop(y, trend, weights, period, ns, nt, nl, params)
    remainder = y - trend - seasonal
    return StlResult(trend, seasonal, remainder, weights)
