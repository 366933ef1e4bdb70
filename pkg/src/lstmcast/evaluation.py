"""Forecast metrics and the cross-model comparison grid.

All errors are measured in price units. "Accuracy" has no single standard
meaning for regression, so every report carries the label of the
definition that produced it:

``one_minus_mape``
    1 - mean(|a - p| / |a|)
``one_minus_nrmse``
    1 - rmse / (max(a) - min(a))
"""

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRangeError,
    EmptyInputError,
    InconsistentMetricsError,
    LengthMismatchError,
    MissingCellError,
    ZeroActualError,
)

ACCURACY_DEFINITIONS = ("one_minus_mape", "one_minus_nrmse")
METRICS = ("accuracy", "mae", "mse", "rmse")

# slack for mae <= rmse, which holds exactly in real arithmetic but can be
# broken by a rounding step when all absolute errors are (nearly) equal
_ULP_SLACK = 8 * np.finfo(np.float64).eps


def _pair(actual, predicted):
    a = np.asarray(actual, dtype=np.float64).ravel()
    p = np.asarray(predicted, dtype=np.float64).ravel()
    if a.size != p.size:
        raise LengthMismatchError(f"{a.size} actual values vs {p.size} predictions")
    if a.size == 0:
        raise EmptyInputError("no values to score")
    return a, p


def compute_metrics(actual, predicted):
    """Return ``(mae, mse, rmse)``."""
    a, p = _pair(actual, predicted)
    err = a - p
    mae = math.fsum(np.abs(err)) / err.size
    mse = math.fsum(err * err) / err.size
    return mae, mse, math.sqrt(mse)


def compute_accuracy(actual, predicted, definition="one_minus_mape"):
    a, p = _pair(actual, predicted)
    if definition == "one_minus_mape":
        if np.any(a == 0):
            raise ZeroActualError("one_minus_mape is undefined when an actual value is 0")
        return 1.0 - math.fsum(np.abs(a - p) / np.abs(a)) / a.size
    if definition == "one_minus_nrmse":
        span = float(a.max() - a.min())
        if span == 0:
            raise DegenerateRangeError("one_minus_nrmse is undefined for constant actual values")
        return 1.0 - compute_metrics(a, p)[2] / span
    raise ValueError(f"unknown accuracy definition {definition!r}; choose from {ACCURACY_DEFINITIONS}")


def consistency_flags(mae, mse, rmse, rel_tol=1e-3):
    """Reasons a (mae, mse, rmse) triple cannot come from one set of errors."""
    flags = []
    if not math.isclose(rmse, math.sqrt(mse), rel_tol=rel_tol):
        flags.append("rmse_is_not_sqrt_mse")
    if mae * mae > mse * (1 + rel_tol):
        flags.append("mae_squared_exceeds_mse")
    return flags


@dataclass(frozen=True)
class MetricsReport:
    """Scores of one model on one stock. Build with :func:`evaluate_forecast`."""

    stock: str
    model: str
    accuracy: float
    mae: float
    mse: float
    rmse: float
    n: int
    accuracy_definition: str = "one_minus_mape"
    units: str = "price"

    def __post_init__(self):
        if self.n < 1:
            raise InconsistentMetricsError("n must be >= 1")
        if self.accuracy > 1.0:
            raise InconsistentMetricsError(f"accuracy {self.accuracy} exceeds 1")
        if not math.isclose(self.rmse, math.sqrt(self.mse), rel_tol=1e-12, abs_tol=0.0):
            raise InconsistentMetricsError(f"rmse {self.rmse} != sqrt(mse {self.mse})")
        if self.mae > self.rmse * (1 + _ULP_SLACK):
            raise InconsistentMetricsError(f"mae {self.mae} exceeds rmse {self.rmse}")

    def to_dict(self):
        return {
            "stock": self.stock,
            "model": self.model,
            "accuracy": self.accuracy,
            "accuracy_definition": self.accuracy_definition,
            "mae": self.mae,
            "mse": self.mse,
            "rmse": self.rmse,
            "n": self.n,
            "units": self.units,
        }

    def to_text(self):
        return (f"{self.stock} [{self.model}] n={self.n}\n"
                f"  accuracy ({self.accuracy_definition}) {self.accuracy:.5f}\n"
                f"  MAE  {self.mae:.5f}\n  MSE  {self.mse:.5f}\n  RMSE {self.rmse:.5f}")


def evaluate_forecast(stock, model, actual, predicted, definition="one_minus_mape"):
    mae, mse, rmse = compute_metrics(actual, predicted)
    acc = compute_accuracy(actual, predicted, definition)
    return MetricsReport(stock, model, acc, mae, mse, rmse, int(np.size(actual)), definition)


@dataclass(frozen=True)
class ComparisonTable:
    stocks: tuple
    models: tuple
    cells: dict  # (stock, model) -> MetricsReport

    def cell(self, stock, model):
        try:
            return self.cells[(stock, model)]
        except KeyError:
            raise MissingCellError(stock, model) from None

    def header(self):
        return ["stock"] + [f"{m}_{k}" for m in self.models for k in METRICS]

    def rows(self):
        for s in self.stocks:
            row = [s]
            for m in self.models:
                r = self.cells[(s, m)]
                row += [r.accuracy, r.mae, r.mse, r.rmse]
            yield row

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
        return buf.getvalue()

    def to_text(self):
        """Aligned grid: one block of four metric columns per model."""
        cw = 10
        top = f"{'':<10}" + "".join(f"{m:^{cw * 4}}" for m in self.models)
        sub = f"{'stock':<10}" + "".join(f"{k.upper() if k != 'accuracy' else 'ACC':>{cw}}"
                                         for _ in self.models for k in METRICS)
        body = [f"{row[0]:<10}" + "".join(f"{v:>{cw}.5f}" for v in row[1:]) for row in self.rows()]
        return "\n".join([top, sub, *body])

    def accuracy_csv(self, stock=None):
        """``model,accuracy`` lines for one stock (the first by default)."""
        stock = self.stocks[0] if stock is None else stock
        lines = ["model,accuracy"] + [f"{m},{self.cell(stock, m).accuracy!r}" for m in self.models]
        return "\n".join(lines) + "\n"


def build_comparison(reports, stocks=None, models=None):
    """Arrange reports into a stock x model grid.

    Later reports replace earlier ones for the same cell (with a warning).
    ``stocks``/``models`` fix the expected axes; by default they are taken
    from the reports in first-seen order.
    """
    cells = {}
    seen_s, seen_m = [], []
    for r in reports:
        key = (r.stock, r.model)
        if key in cells:
            warnings.warn(f"duplicate report for {key}; keeping the latest", stacklevel=2)
        cells[key] = r
        if r.stock not in seen_s:
            seen_s.append(r.stock)
        if r.model not in seen_m:
            seen_m.append(r.model)
    stocks = tuple(stocks) if stocks is not None else tuple(seen_s)
    models = tuple(models) if models is not None else tuple(seen_m)
    for s in stocks:
        for m in models:
            if (s, m) not in cells:
                raise MissingCellError(s, m)
    return ComparisonTable(stocks, models, {k: v for k, v in cells.items() if k[0] in stocks and k[1] in models})
