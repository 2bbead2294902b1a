"""Record the reference decomposition used by the STL trend-recovery test.

Uses statsmodels' STL, which is independent of the in-package implementation.
Run once; the output is committed under tests/data/.
"""
import json
from pathlib import Path

import numpy as np
from statsmodels.tsa.seasonal import STL

N_DAYS = 150
PERIOD = 7
AMPLITUDE = 10.0

t = np.arange(N_DAYS, dtype=float)
ramp = 2.0 + 0.3 * t
sawtooth = -AMPLITUDE + 2.0 * AMPLITUDE * (t % PERIOD) / (PERIOD - 1)
series = ramp + sawtooth

fit = STL(series, period=PERIOD, seasonal=10 * N_DAYS + 1, robust=False).fit()

out = {
    "generator": "statsmodels.tsa.seasonal.STL",
    "period": PERIOD,
    "amplitude": AMPLITUDE,
    "ramp": {"intercept": 2.0, "slope": 0.3},
    "series": series.tolist(),
    "trend": fit.trend.tolist(),
    "seasonal": fit.seasonal.tolist(),
}
path = Path(__file__).resolve().parents[1] / "tests" / "data" / "stl_ramp_sawtooth_reference.json"
path.write_text(json.dumps(out, indent=1) + "\n")

lo, hi = int(0.1 * N_DAYS), int(0.9 * N_DAYS)
rmse = float(np.sqrt(np.mean((fit.trend[lo:hi] - ramp[lo:hi]) ** 2)))
print(f"wrote {path}; reference trend RMSE vs ramp on interior = {rmse:.3g}")
