# %% [markdown]
# # LSTM against the feed-forward baselines
#
# Same data, same split and same seed for all three kinds. Small layer
# sizes keep this under a minute; the CLI `compare` command does the same
# with the full defaults.

# %%
from lstmcast import pipeline
from lstmcast.evaluation import build_comparison
from lstmcast.synthetic import bundled

cfg = pipeline.RunConfig(data=str(bundled("synthetic_ohlcv.csv")), window=20, units=(16,),
                         mlp_units=(32, 16), cnn_filters=(16,), epochs=10)
prepared = pipeline.prepare(cfg)
print(len(prepared.train), "training windows,", len(prepared.test), "test windows")

# %%
reports = []
for kind in ("lstm", "mlp", "cnn1d"):
    art, trace = pipeline.fit(cfg, prepared, kind)
    report, _ = pipeline.score(art, prepared, cfg.accuracy_def, kind)
    print(f"{kind:6s} {art.metadata['param_count']:6d} params  final loss {trace.losses[-1]:.2e}")
    reports.append(report)

# %%
table = build_comparison(reports)
print(table.to_text())
print(table.accuracy_csv())
