# %% [markdown]
# # From a price file to training windows
#
# Load a daily OHLCV file, drop bad rows, split it by date, scale with
# parameters fitted on the earlier part only, and cut sliding windows.

# %%
import numpy as np

from lstmcast.marketdata import SectorRegistry, clean, parse_csv, summary_stats
from lstmcast.preprocess import SplitSpec, chrono_split, fit_scaler, inverse_transform, make_windows, transform
from lstmcast.synthetic import bundled

frame = clean(parse_csv(bundled("synthetic_ohlcv.csv")))
print(frame.symbol, len(frame.rows), "rows,", len(frame.rejected), "rejected")
print(summary_stats(frame).to_text())

# %% [markdown]
# Tickers map to a sector through the bundled registry.

# %%
registry = SectorRegistry.load()
print("GTB ->", registry.sector_of("GTB"), "| dangote cement ->", registry.sector_of("dangote cement"))

# %% [markdown]
# The first 80% of trading days train the model, the rest test it.
# The scaler never sees the test rows.

# %%
train_rows, test_rows = chrono_split(frame.rows, SplitSpec(0.8), window_length=30)
close_train = np.array([[r.close] for r in train_rows])
close_test = np.array([[r.close] for r in test_rows])
scaler = fit_scaler(close_train, ["close"])
print("train range", scaler.min, scaler.max)

scaled_test = transform(scaler, close_test)
print("test values outside [0, 1]:", int(np.sum((scaled_test < 0) | (scaled_test > 1))))
print("roundtrip error", np.abs(inverse_transform(scaler, scaled_test) - close_test).max())

# %%
windows = make_windows(transform(scaler, close_train), 30, ["close"])
print("inputs", windows.inputs.shape, "targets", windows.targets.shape)
