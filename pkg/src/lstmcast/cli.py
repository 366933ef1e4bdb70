"""Command-line interface.

    lstmcast ingest      --data FILE [--symbol T] [--strict-clean]
    lstmcast train       --data FILE [--kind lstm] [--units 70,70,70] [--epochs 50] ...
    lstmcast evaluate    --data FILE --artifact out/model.json
    lstmcast compare     --data FILE --models lstm,mlp,cnn1d
    lstmcast export-plot --data FILE --artifact out/model.json [--svg]

Settings resolve as: command-line flag > ``--config`` file (flat
``key=value`` lines, ``#`` comments) > built-in defaults.

Exit codes: 0 ok, 1 usage, 2 data, 3 numeric divergence, 4 artifact.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import artifact, pipeline
from .errors import ArtifactError, DataError, DivergenceError
from .evaluation import ACCURACY_DEFINITIONS, build_comparison
from .marketdata import summary_stats, write_rejections
from .networks import KINDS, count_params
from .plotting import render_svg

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED, EXIT_ARTIFACT = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _ints(text):
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _names(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    return None if str(text).strip().lower() in ("", "none") else float(text)


# RunConfig field -> converter for config-file values
CONVERTERS = {
    "data": str, "symbol": str, "window": int, "units": _ints, "kind": str, "features": _names,
    "dropout": float, "epochs": int, "batch": int, "split": float, "seed": int, "accuracy_def": str,
    "strict_clean": _bool, "out": str, "lr": float, "optimizer": str, "clip": _opt_float,
    "shuffle": _bool, "seed_test_windows": _bool, "mlp_units": _ints, "cnn_filters": _ints,
    "kernel": int, "models": _names, "svg": _bool,
}


def read_config_file(path):
    """Parse flat ``key=value`` lines into RunConfig keyword arguments."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    values = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONVERTERS:
            raise UsageError(f"{path}:{n}: expected key=value with a known key, got {line!r}")
        try:
            values[key] = CONVERTERS[key](value.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{n}: {exc}") from None
    return values


def _add_common(p):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="flat key=value config file")
    p.add_argument("--data", default=S, help="OHLCV CSV file")
    p.add_argument("--symbol", default=S, help="ticker to select from the file")
    p.add_argument("--strict-clean", dest="strict_clean", action="store_true", default=S,
                   help="also drop bars whose low/high do not bracket open/close")
    p.add_argument("--out", default=S, help="output directory (default: out)")


def _add_model(p):
    S = argparse.SUPPRESS
    p.add_argument("--window", type=int, default=S)
    p.add_argument("--units", type=_ints, default=S, help="LSTM layer widths, e.g. 70,70,70")
    p.add_argument("--features", type=_names, default=S, help="input columns, e.g. close or open,close,volume")
    p.add_argument("--dropout", type=float, default=S)
    p.add_argument("--epochs", type=int, default=S)
    p.add_argument("--batch", type=int, default=S)
    p.add_argument("--split", type=float, default=S, help="training fraction")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--lr", type=float, default=S)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default=S)
    p.add_argument("--clip", type=float, default=S, help="global gradient-norm clip threshold (e.g. 5.0)")
    p.add_argument("--shuffle", action="store_true", default=S, help="shuffle mini-batches (seeded)")
    p.add_argument("--seed-test-windows", dest="seed_test_windows", action="store_true", default=S,
                   help="let test windows start inside the training tail")
    p.add_argument("--mlp-units", dest="mlp_units", type=_ints, default=S)
    p.add_argument("--cnn-filters", dest="cnn_filters", type=_ints, default=S)
    p.add_argument("--kernel", type=int, default=S)
    p.add_argument("--accuracy-def", dest="accuracy_def", choices=ACCURACY_DEFINITIONS, default=S)


def build_parser():
    parser = _Parser(prog="lstmcast", description="LSTM / MLP / 1D-CNN closing-price forecasting")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse, clean and summarise a price file")
    _add_common(p)

    p = sub.add_parser("train", help="train one model and save it")
    _add_common(p)
    _add_model(p)
    p.add_argument("--kind", choices=KINDS, default=argparse.SUPPRESS)

    p = sub.add_parser("evaluate", help="score a saved model on the test partition")
    _add_common(p)
    p.add_argument("--artifact", required=True)
    p.add_argument("--accuracy-def", dest="accuracy_def", choices=ACCURACY_DEFINITIONS, default=argparse.SUPPRESS)

    p = sub.add_parser("compare", help="train several model kinds on the same split")
    _add_common(p)
    _add_model(p)
    p.add_argument("--models", type=_names, default=argparse.SUPPRESS, help="e.g. lstm,mlp,cnn1d")

    p = sub.add_parser("export-plot", help="write date/actual/predicted series for a saved model")
    _add_common(p)
    p.add_argument("--artifact", required=True)
    p.add_argument("--svg", action="store_true", default=argparse.SUPPRESS)
    return parser


def resolve_config(ns):
    values = {}
    if "config" in ns:
        values.update(read_config_file(ns.config))
    fields = {f.name for f in dataclasses.fields(pipeline.RunConfig)}
    values.update({k: v for k, v in vars(ns).items() if k in fields})
    try:
        return pipeline.RunConfig(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _stored_config(cfg, art, ns):
    run = art.metadata.get("run", {})
    cfg = cfg.with_data_fields(run) if "window" in run else cfg
    if "accuracy_def" not in ns and "accuracy_def" in run:
        cfg = dataclasses.replace(cfg, accuracy_def=run["accuracy_def"])
    return cfg


def cmd_ingest(cfg, ns=None):
    frame = pipeline.load_frame(cfg)
    out = pipeline.output_dir(cfg)
    write_rejections(frame, out / "rejections.csv")
    print(f"{frame.symbol}: {len(frame)} rows kept, {len(frame.rejected)} rejected")
    print(summary_stats(frame).to_text())
    return EXIT_OK


def cmd_train(cfg, ns=None):
    prepared = pipeline.prepare(cfg)
    art, report = pipeline.fit(cfg, prepared)
    out = pipeline.output_dir(cfg)
    artifact.save(art, out / "model.json")
    report.write_csv(out / "loss.csv")
    total, breakdown = count_params(art.spec)
    final = f"{report.losses[-1]:.6g}" if report.losses else "n/a (0 epochs)"
    print(f"params {total} ({', '.join(f'{n} {c}' for n, c in breakdown)})")
    print(f"final loss {final}")
    print(f"wall time {report.wall_time:.2f}s")
    print(f"wrote {out / 'model.json'}")
    return EXIT_OK


def cmd_evaluate(cfg, ns):
    art = artifact.load(ns.artifact)
    cfg = _stored_config(cfg, art, ns)
    prepared = pipeline.prepare(cfg, scaler=art.scaler)
    report, _ = pipeline.score(art, prepared, cfg.accuracy_def)
    out = pipeline.output_dir(cfg)
    (out / "metrics.json").write_text(json.dumps(report.to_dict(), indent=1) + "\n", encoding="utf-8")
    print(report.to_text())
    return EXIT_OK


def cmd_compare(cfg, ns=None):
    if len(cfg.models) < 2:
        raise UsageError("compare needs at least two model kinds (--models lstm,mlp,cnn1d)")
    prepared = pipeline.prepare(cfg)
    reports = []
    for kind in cfg.models:
        try:
            art, _ = pipeline.fit(cfg, prepared, kind)
        except DivergenceError as exc:
            raise DivergenceError(f"{kind}: {exc}") from exc
        reports.append(pipeline.score(art, prepared, cfg.accuracy_def, model=kind)[0])
    table = build_comparison(reports, models=cfg.models)
    out = pipeline.output_dir(cfg)
    (out / "comparison.csv").write_text(table.to_csv(), encoding="utf-8")
    (out / "comparison.txt").write_text(table.to_text() + "\n", encoding="utf-8")
    (out / "accuracy.csv").write_text(table.accuracy_csv(), encoding="utf-8")
    print(f"test samples per model: {', '.join(f'{r.model} {r.n}' for r in reports)}")
    print(f"accuracy definition: {cfg.accuracy_def}")
    print(table.to_text())
    return EXIT_OK


def cmd_export_plot(cfg, ns):
    art = artifact.load(ns.artifact)
    cfg = _stored_config(cfg, art, ns)
    prepared = pipeline.prepare(cfg, scaler=art.scaler)
    series = pipeline.plot_series(art, prepared)
    out = pipeline.output_dir(cfg)
    (out / "plot.csv").write_text(series.to_csv(), encoding="utf-8")
    print(f"wrote {out / 'plot.csv'}")
    if cfg.svg:
        (out / "plot.svg").write_text(render_svg(series, title=f"{prepared.symbol} close"), encoding="utf-8")
        print(f"wrote {out / 'plot.svg'}")
    return EXIT_OK


COMMANDS = {"ingest": cmd_ingest, "train": cmd_train, "evaluate": cmd_evaluate,
            "compare": cmd_compare, "export-plot": cmd_export_plot}


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("missing subcommand: " + ", ".join(COMMANDS))
        cfg = resolve_config(ns)
        return COMMANDS[ns.command](cfg, ns)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as exc:
        print(f"training diverged: {exc}; retry with --clip 5.0 or a smaller --lr", file=sys.stderr)
        return EXIT_DIVERGED
    except ArtifactError as exc:
        print(f"artifact error: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT


if __name__ == "__main__":
    sys.exit(main())
