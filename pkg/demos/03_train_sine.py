# %% [markdown]
# # Learning a sine wave
#
# A 16-unit LSTM on a 500-point sine series should beat the persistence
# forecast (tomorrow equals today) by a wide margin. Takes a few seconds.

# %%
import numpy as np

from lstmcast.evaluation import compute_accuracy, evaluate_forecast
from lstmcast.networks import NetworkSpec
from lstmcast.preprocess import fit_scaler, make_windows, transform
from lstmcast.synthetic import sine_series
from lstmcast.training import TrainConfig, predict_series, train

x = sine_series(500)
n_train = int(len(x) * 0.8)
scaler = fit_scaler(x[:n_train], ["close"])
train_ds = make_windows(transform(scaler, x[:n_train]), 20, ["close"])
test_ds = make_windows(transform(scaler, x[n_train:]), 20, ["close"])

# %%
spec = NetworkSpec(layers=(16,), window_length=20, dropout=0.2)
params, report = train(spec, train_ds, TrainConfig(epochs=200, learning_rate=1e-3, dropout=0.2, seed=1))
print("loss: first", f"{report.losses[0]:.3e}", "last", f"{report.losses[-1]:.3e}", f"({report.wall_time:.1f} s)")

# %%
fc = predict_series(spec, params, test_ds, scaler)
actual = x[n_train:][fc.positions]
model = evaluate_forecast("SINE", "lstm", actual, fc.values)
persistence = compute_accuracy(actual, x[n_train:][fc.positions - 1])
print(model.to_text())
print(f"persistence accuracy {persistence:.4f}")
