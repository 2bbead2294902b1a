import json
from math import ceil

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmr_mcdm.preprocess import LoessError, StlLengthError, StlParams, loess_fit, loess_smooth, stl

from conftest import DATA


def wls_oracle(x, y, span, degree, robustness=None):
    """Per-point weighted least squares, written independently of the package."""
    n = len(x)
    q = ceil(span * n)
    out = []
    for x0 in x:
        d = sorted(abs(xi - x0) for xi in x)
        h = d[q - 1]
        w = []
        for i, xi in enumerate(x):
            u = abs(xi - x0) / h
            wi = (1 - u**3) ** 3 if u < 1 else 0.0
            if robustness is not None:
                wi *= robustness[i]
            w.append(wi)
        sw = np.sqrt(np.array(w))
        design = np.array([[xi**k for k in range(degree + 1)] for xi in x])
        coef, *_ = np.linalg.lstsq(design * sw[:, None], np.asarray(y) * sw, rcond=None)
        out.append(sum(c * x0**k for k, c in enumerate(coef)))
    return np.array(out)


def test_loess_matches_wls_oracle_examples():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(0, 10, 30))
    y = np.sin(x) + rng.normal(0, 0.3, 30)
    np.testing.assert_allclose(loess_smooth(x, y, 0.5, 1), wls_oracle(x, y, 0.5, 1), atol=1e-9)
    np.testing.assert_allclose(loess_smooth(x, y, 0.8, 2), wls_oracle(x, y, 0.8, 2), atol=1e-9)
    np.testing.assert_allclose(loess_smooth(x, y, 0.3, 0), wls_oracle(x, y, 0.3, 0), atol=1e-9)


@pytest.mark.parametrize("span", [0.2, 0.5, 1.0])
def test_loess_reproduces_line(span):
    x = np.linspace(-3, 7, 25)
    y = 2.5 * x - 1.0
    np.testing.assert_allclose(loess_smooth(x, y, span, 1), y, atol=1e-9)


def test_zero_robustness_weight_removes_point():
    x = np.arange(20.0)
    y = 0.5 * x + 1
    y_out = y.copy()
    y_out[7] = 500.0
    w = np.ones(20)
    w[7] = 0.0
    fit = loess_smooth(x, y_out, 0.4, 1, w)
    np.testing.assert_allclose(fit, y, atol=1e-9)
    y_other = y_out.copy()
    y_other[7] = -1e4
    np.testing.assert_allclose(loess_smooth(x, y_other, 0.4, 1, w), fit, atol=1e-9)


def test_loess_degenerate():
    with pytest.raises(LoessError):
        loess_smooth([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 0.34, 1)
    with pytest.raises(LoessError):
        loess_smooth([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 1.0, 1, [0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        loess_smooth([1.0, 2.0], [1.0, 2.0], 0.0)


def test_loess_wide_window_tends_to_global_fit():
    x = np.arange(10.0)
    y = np.array([3, 1, 4, 1, 5, 9, 2, 6, 5, 3.0])
    fit = loess_fit(x, y, [4.5], 10_000, degree=0)
    assert fit[0] == pytest.approx(y.mean(), rel=1e-6)


def test_stl_params_defaults():
    ns, nt, nl = StlParams().resolve(150, 7)
    assert ns == 1501 and nt == 11 and nl == 7
    assert StlParams(seasonal_window=7).resolve(150, 7)[1] == 15
    with pytest.raises(ValueError):
        StlParams(seasonal_window=8).resolve(150, 7)


def test_stl_length_error():
    with pytest.raises(StlLengthError):
        stl(np.zeros(13), 7)


def test_stl_constant():
    res = stl(np.full(60, -12.5), 7)
    np.testing.assert_allclose(res.trend, -12.5, atol=1e-6)
    np.testing.assert_allclose(res.seasonal, 0.0, atol=1e-6)
    np.testing.assert_allclose(res.remainder, 0.0, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(14, 120), st.integers(0, 2**31), st.sampled_from([None, 7, 11]),
       st.integers(1, 3), st.integers(1, 3))
def test_stl_components_sum_to_input(n, seed, ns, inner, outer):
    y = np.random.default_rng(seed).normal(0, 20, n).cumsum()
    res = stl(y, 7, StlParams(seasonal_window=ns, inner_iterations=inner, outer_iterations=outer))
    np.testing.assert_allclose(res.trend + res.seasonal + res.remainder, y, atol=1e-9, rtol=0)


def test_stl_seasonal_cycles_near_zero_mean():
    t = np.arange(140)
    y = 0.1 * t + 6 * np.sin(2 * np.pi * t / 7)
    res = stl(y, 7)
    cycle_sums = res.seasonal[: 140 // 7 * 7].reshape(-1, 7).sum(axis=1)
    assert np.abs(cycle_sums[2:-2]).max() < 0.5


def test_stl_trend_recovers_ramp_against_reference():
    ref = json.loads((DATA / "stl_ramp_sawtooth_reference.json").read_text())
    y = np.array(ref["series"])
    n = y.size
    ramp = ref["ramp"]["intercept"] + ref["ramp"]["slope"] * np.arange(n)
    res = stl(y, ref["period"])
    lo, hi = int(0.1 * n), int(0.9 * n)
    assert np.sqrt(np.mean((res.trend[lo:hi] - ramp[lo:hi]) ** 2)) <= 0.1
    np.testing.assert_allclose(res.trend, ref["trend"], atol=1e-6)


def test_stl_matches_statsmodels_when_available():
    sm = pytest.importorskip("statsmodels.tsa.seasonal")
    rng = np.random.default_rng(11)
    y = rng.normal(size=120).cumsum() + 5 * np.sin(np.arange(120) * 2 * np.pi / 7)
    params = StlParams(seasonal_window=13, lowpass_window=9, outer_iterations=3)
    ns, nt, nl = params.resolve(120, 7)
    ref = sm.STL(y, period=7, seasonal=ns, trend=nt, low_pass=nl, robust=True).fit(inner_iter=2, outer_iter=2)
    res = stl(y, 7, params)
    np.testing.assert_allclose(res.trend, ref.trend, atol=1e-6)
    np.testing.assert_allclose(res.seasonal, ref.seasonal, atol=1e-6)
