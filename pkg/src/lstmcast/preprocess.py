"""Min-max scaling, chronological splitting and sliding windows."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateScalerWarning, EmptyDatasetError, ShapeError, TooFewRowsError


@dataclass(frozen=True)
class ScalerParams:
    min: np.ndarray
    max: np.ndarray
    feature_names: tuple = ()

    @property
    def degenerate(self):
        """Per-feature flag: True where the fitted column was constant."""
        return self.max == self.min

    def index(self, name):
        return list(self.feature_names).index(name)

    def to_dict(self):
        return {
            "min": [float(v) for v in self.min],
            "max": [float(v) for v in self.max],
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            min=np.array(d["min"], dtype=np.float64),
            max=np.array(d["max"], dtype=np.float64),
            feature_names=tuple(d.get("feature_names", ())),
        )

    def __eq__(self, other):
        return (
            isinstance(other, ScalerParams)
            and np.array_equal(self.min, other.min)
            and np.array_equal(self.max, other.max)
            and tuple(self.feature_names) == tuple(other.feature_names)
        )


def _as_columns(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x.reshape(-1, 1), True
    if x.ndim != 2:
        raise ShapeError(f"expected (n,) or (n, features), got {x.shape}")
    return x, False


def fit_scaler(series, feature_names=None):
    """Record the column-wise min and max of ``series`` (shape ``(n,)`` or ``(n, F)``)."""
    x, _ = _as_columns(series)
    if x.shape[0] == 0:
        raise EmptyDatasetError("cannot fit a scaler on zero rows")
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{i}" for i in range(x.shape[1]))
    if len(names) != x.shape[1]:
        raise ShapeError(f"{len(names)} feature names for {x.shape[1]} columns")
    return ScalerParams(min=x.min(axis=0), max=x.max(axis=0), feature_names=names)


def _check_width(params, x):
    if x.shape[1] != params.min.shape[0]:
        raise ShapeError(f"scaler fitted on {params.min.shape[0]} features, got {x.shape[1]}")


def _warn_degenerate(params):
    if params.degenerate.any():
        bad = [n for n, d in zip(params.feature_names, params.degenerate) if d]
        warnings.warn(f"constant feature(s) {bad}: scaled values forced to 0", DegenerateScalerWarning, stacklevel=3)


def transform(params, x):
    """Map to ``(x - min) / (max - min)``. Values outside the fit range are not clipped."""
    cols, flat = _as_columns(x)
    _check_width(params, cols)
    _warn_degenerate(params)
    span = params.max - params.min
    safe = np.where(params.degenerate, 1.0, span)
    out = np.where(params.degenerate, 0.0, (cols - params.min) / safe)
    return out.ravel() if flat else out


def inverse_transform(params, y):
    """Undo :func:`transform`. Degenerate features map back to their constant."""
    cols, flat = _as_columns(y)
    _check_width(params, cols)
    _warn_degenerate(params)
    out = np.where(params.degenerate, params.min, cols * (params.max - params.min) + params.min)
    return out.ravel() if flat else out


def inverse_transform_feature(params, name, y):
    """Inverse-transform a 1-D array belonging to the single feature ``name``."""
    j = params.index(name)
    sub = ScalerParams(params.min[j:j + 1], params.max[j:j + 1], (name,))
    return inverse_transform(sub, np.asarray(y, dtype=np.float64))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def chrono_split(rows, spec=SplitSpec(), window_length=0):
    """First ``floor(n * fraction)`` items train, the rest test. Never shuffles."""
    n = len(rows)
    if n < window_length + 2:
        raise TooFewRowsError(f"{n} rows cannot be split for window length {window_length}")
    cut = int(np.floor(n * spec.train_fraction))
    return rows[:cut], rows[cut:]


@dataclass(frozen=True)
class WindowedDataset:
    """Supervised samples: ``inputs[i]`` is a window, ``targets[i]`` the next close.

    ``positions[i]`` is the index, within the partition the windows were cut
    from, of the row whose value ``targets[i]`` is; ``dates`` mirrors it when
    known.
    """

    inputs: np.ndarray
    targets: np.ndarray
    window_length: int
    feature_names: tuple
    positions: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    dates: tuple = ()

    def __len__(self):
        return self.targets.shape[0]

    @property
    def n_features(self):
        return self.inputs.shape[2]


def make_windows(scaled, window_length, feature_names=None, target="close", dates=None, context=None):
    """Cut ``scaled`` (``(n,)`` or ``(n, F)``) into overlapping windows.

    ``context`` optionally prepends rows (e.g. the tail of the training
    partition) so that the first windows of ``scaled`` get predictions too;
    context rows are never targets.
    """
    x, _ = _as_columns(scaled)
    if feature_names is not None:
        names = tuple(feature_names)
    else:
        names = ("close",) if x.shape[1] == 1 else tuple(f"f{i}" for i in range(x.shape[1]))
    if len(names) != x.shape[1]:
        raise ShapeError(f"{len(names)} feature names for {x.shape[1]} columns")
    t_col = names.index(target) if target in names else 0 if x.shape[1] == 1 else None
    if t_col is None:
        raise ShapeError(f"target feature {target!r} not among {names}")
    if window_length < 1:
        raise ValueError("window_length must be at least 1")

    offset = 0
    if context is not None:
        ctx, _ = _as_columns(context)
        ctx = ctx[-window_length:]
        offset = ctx.shape[0]
        x = np.vstack([ctx, x])
    n = x.shape[0]
    if n <= window_length:
        raise TooFewRowsError(f"{n} rows give no windows of length {window_length}")

    starts = np.arange(n - window_length)
    windows = np.lib.stride_tricks.sliding_window_view(x, window_length, axis=0)[: n - window_length]
    inputs = np.ascontiguousarray(np.swapaxes(windows, 1, 2))
    targets = x[starts + window_length, t_col].copy()
    positions = starts + window_length - offset
    keep = positions >= 0
    inputs, targets, positions = inputs[keep], targets[keep], positions[keep]
    target_dates = tuple(dates[p] for p in positions) if dates is not None else ()
    return WindowedDataset(inputs, targets, window_length, names, positions, target_dates)
