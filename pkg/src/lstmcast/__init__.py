"""From-scratch recurrent forecasting of daily closing prices.

Submodules: ``numerics`` (kernels, seeded RNG), ``marketdata`` (CSV ingest and
cleaning), ``preprocess`` (scaling, splits, windows), ``networks`` (LSTM / MLP
/ 1D-CNN), ``training`` (backprop, optimizers, gradient checks),
``evaluation`` (metrics, comparison grid), ``artifact`` and ``plotting``
(file formats) and ``cli``.
"""

__version__ = "0.1.0"
