"""Deterministic synthetic price series used as bundled fixtures.

``python -m lstmcast.synthetic`` regenerates the CSV files under
``lstmcast/data``.
"""

import datetime as dt
from importlib import resources
from pathlib import Path

import numpy as np

from .marketdata import COLUMNS, OhlcvRow, TimeSeriesFrame

SINE_OFFSET = 2.2
SINE_STEP = 0.2


def trading_days(n, start=dt.date(2001, 1, 2)):
    """The first ``n`` weekdays on or after ``start``."""
    days, d = [], start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def sine_series(n=500, offset=SINE_OFFSET, step=SINE_STEP):
    """``offset + sin(step * t)``: unit amplitude, kept positive for percentage errors."""
    return offset + np.sin(step * np.arange(n))


def _frame(symbol, dates, open_, close, low, high, volume):
    rows = tuple(
        OhlcvRow(d, symbol, float(o), float(c), float(lo), float(hi), int(v), line=k + 2)
        for k, (d, o, c, lo, hi, v) in enumerate(zip(dates, open_, close, low, high, volume))
    )
    return TimeSeriesFrame(symbol, rows)


def sine_frame(n=500, symbol="SINE"):
    close = sine_series(n)
    return _frame(symbol, trading_days(n), close, close, close, close, np.full(n, 1000))


def synthetic_ohlcv(n=2000, symbol="SYN", seed=7):
    """Trend + yearly-ish seasonality + AR(1) noise, with consistent OHLC bars."""
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    noise = np.zeros(n)
    shocks = rng.normal(0.0, 0.12, n)
    for k in range(1, n):
        noise[k] = 0.8 * noise[k - 1] + shocks[k]
    close = 20.0 + 0.004 * t + 2.0 * np.sin(2 * np.pi * t / 120.0) + noise
    open_ = np.concatenate([[close[0]], close[:-1]]) + rng.normal(0.0, 0.05, n)
    high = np.maximum(open_, close) + np.abs(rng.normal(0.0, 0.08, n))
    low = np.minimum(open_, close) - np.abs(rng.normal(0.0, 0.08, n))
    volume = np.round(rng.lognormal(14.0, 0.8, n))
    r2 = lambda x: np.round(x, 2)
    return _frame(symbol, trading_days(n), r2(open_), r2(close), r2(low), r2(high), volume)


def write_dayfirst_csv(frame, path):
    """Write ``frame`` with ``dd/mm/yyyy`` dates, the layout of exchange exports."""
    lines = [",".join(COLUMNS)]
    for r in frame.rows:
        nums = [f"{v:.10g}" for v in (r.open, r.close, r.low, r.high)] + [str(r.volume)]
        lines.append(",".join([r.date.strftime("%d/%m/%Y"), r.symbol, *nums]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def bundled(name):
    """Path of a bundled data file (``sine.csv``, ``synthetic_ohlcv.csv``, ``sectors.tsv``)."""
    return Path(str(resources.files("lstmcast").joinpath(f"data/{name}")))


def main():
    out = Path(__file__).parent / "data"
    write_dayfirst_csv(sine_frame(), out / "sine.csv")
    write_dayfirst_csv(synthetic_ohlcv(), out / "synthetic_ohlcv.csv")


if __name__ == "__main__":
    main()
