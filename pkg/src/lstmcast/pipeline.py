"""End-to-end steps shared by the CLI subcommands.

ingest -> clean -> chronological split -> scaler fitted on the training
partition -> per-partition windows -> train -> predict -> score.
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import artifact
from .evaluation import ACCURACY_DEFINITIONS, evaluate_forecast
from .marketdata import NUMERIC_COLUMNS, clean, parse_csv
from .networks import KINDS, NetworkSpec, count_params
from .plotting import PlotSeries
from .preprocess import SplitSpec, chrono_split, fit_scaler, make_windows, transform
from .training import TrainConfig, predict_series, train


@dataclass
class RunConfig:
    data: str | None = None
    symbol: str | None = None
    window: int = 30
    units: tuple = (70, 70, 70)
    kind: str = "lstm"
    features: tuple = ("close",)
    dropout: float = 0.2
    epochs: int = 50
    batch: int = 35
    split: float = 0.8
    seed: int = 1
    accuracy_def: str = "one_minus_mape"
    strict_clean: bool = False
    out: str = "out"
    lr: float = 0.001
    optimizer: str = "adam"
    clip: float | None = None
    shuffle: bool = False
    seed_test_windows: bool = False
    mlp_units: tuple = (64, 32)
    cnn_filters: tuple = (32,)
    kernel: int = 5
    models: tuple = KINDS
    svg: bool = False

    def __post_init__(self):
        self.units = tuple(int(u) for u in self.units)
        self.mlp_units = tuple(int(u) for u in self.mlp_units)
        self.cnn_filters = tuple(int(u) for u in self.cnn_filters)
        self.features = tuple(self.features)
        self.models = tuple(self.models)
        if "close" not in self.features:
            raise ValueError("features must include close (it is the prediction target)")
        bad = [f for f in self.features if f not in NUMERIC_COLUMNS]
        if bad:
            raise ValueError(f"unknown feature(s) {bad}; choose from {NUMERIC_COLUMNS}")
        if self.accuracy_def not in ACCURACY_DEFINITIONS:
            raise ValueError(f"accuracy definition must be one of {ACCURACY_DEFINITIONS}")
        for k in (self.kind, *self.models):
            if k not in KINDS:
                raise ValueError(f"unknown model kind {k!r}; choose from {KINDS}")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        SplitSpec(self.split)
        self.train_config()
        self.spec_for(self.kind)

    def spec_for(self, kind):
        layers = {"lstm": self.units, "mlp": self.mlp_units, "cnn1d": self.cnn_filters}[kind]
        return NetworkSpec(kind=kind, layers=layers, window_length=self.window,
                           n_features=len(self.features), dropout=self.dropout, kernel_size=self.kernel)

    def train_config(self):
        return TrainConfig(epochs=self.epochs, batch_size=self.batch, learning_rate=self.lr,
                           optimizer=self.optimizer, dropout=self.dropout, seed=self.seed,
                           shuffle_batches=self.shuffle, clip_norm=self.clip)

    def data_fields(self):
        """Settings that determine the prepared dataset (stored in artifacts)."""
        return {"symbol": self.symbol, "window": self.window, "features": list(self.features),
                "split": self.split, "strict_clean": self.strict_clean,
                "seed_test_windows": self.seed_test_windows}

    def with_data_fields(self, d):
        return dataclasses.replace(self, symbol=d.get("symbol", self.symbol), window=d["window"],
                                   features=tuple(d["features"]), split=d["split"],
                                   strict_clean=d["strict_clean"],
                                   seed_test_windows=d.get("seed_test_windows", False))


@dataclass
class Prepared:
    frame: object
    train_rows: tuple
    test_rows: tuple
    scaler: object
    train: object  # WindowedDataset
    test: object
    features: tuple = field(default=("close",))

    @property
    def symbol(self):
        return self.frame.symbol


def load_frame(cfg):
    if not cfg.data:
        raise ValueError("no data file given (--data)")
    return clean(parse_csv(cfg.data, cfg.symbol), strict=cfg.strict_clean)


def _matrix(rows, names):
    return np.array([[r.value(n) for n in names] for r in rows], dtype=np.float64)


def prepare(cfg, frame=None, scaler=None):
    """Split, scale and window a cleaned frame.

    ``scaler`` reuses stored parameters (evaluation of a saved model);
    otherwise it is fitted on the training partition only.
    """
    frame = frame if frame is not None else load_frame(cfg)
    train_rows, test_rows = chrono_split(frame.rows, SplitSpec(cfg.split), cfg.window)
    names = cfg.features
    tr, te = _matrix(train_rows, names), _matrix(test_rows, names)
    if scaler is None:
        scaler = fit_scaler(tr, names)
    tr_s, te_s = transform(scaler, tr), transform(scaler, te)
    train_ds = make_windows(tr_s, cfg.window, names, dates=[r.date for r in train_rows])
    test_ds = make_windows(te_s, cfg.window, names, dates=[r.date for r in test_rows],
                           context=tr_s if cfg.seed_test_windows else None)
    return Prepared(frame, train_rows, test_rows, scaler, train_ds, test_ds, names)


def fit(cfg, prepared, kind=None):
    """Train one model kind on ``prepared``; returns ``(ModelArtifact, TrainReport)``."""
    kind = kind or cfg.kind
    spec = cfg.spec_for(kind)
    tcfg = cfg.train_config()
    params, report = train(spec, prepared.train, tcfg)
    run = {**cfg.data_fields(), "kind": kind, "train": tcfg.to_dict(), "accuracy_def": cfg.accuracy_def}
    meta = {
        "seed": cfg.seed,
        "config_hash": artifact.config_hash(run),
        "epochs_run": len(report.losses),
        "param_count": count_params(spec)[0],
        "final_loss": report.losses[-1] if report.losses else None,
        "run": run,
    }
    return artifact.ModelArtifact(spec, params, prepared.scaler, meta), report


def actual_close(rows, positions):
    return np.array([rows[p].close for p in positions], dtype=np.float64)


def score(art, prepared, definition, model=None):
    """Metrics of a model on the test partition, in price units."""
    fc = predict_series(art.spec, art.params, prepared.test, art.scaler)
    actual = actual_close(prepared.test_rows, fc.positions)
    return evaluate_forecast(prepared.symbol, model or art.spec.kind, actual, fc.values, definition), fc


def plot_series(art, prepared):
    """Full cleaned close series with predictions wherever a window exists."""
    preds = [None] * len(prepared.frame.rows)
    n_train = len(prepared.train_rows)
    for ds, offset in ((prepared.train, 0), (prepared.test, n_train)):
        fc = predict_series(art.spec, art.params, ds, art.scaler)
        for p, v in zip(fc.positions, fc.values):
            preds[offset + int(p)] = float(v)
    rows = prepared.frame.rows
    return PlotSeries([r.date for r in rows], [r.close for r in rows], preds)


def output_dir(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out
