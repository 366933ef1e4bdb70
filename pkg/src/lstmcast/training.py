"""Loss, hand-derived gradients, optimizers and the mini-batch training loop."""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, EmptyDatasetError, EmptyInputError, LengthMismatchError, ShapeError
from .networks import dropout_sites, forward_batch, forward_train, init_params
from .numerics import RngState
from .preprocess import inverse_transform_feature


def mse_loss(predictions, targets):
    p = np.asarray(predictions, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if p.size != t.size:
        raise LengthMismatchError(f"{p.size} predictions for {t.size} targets")
    if p.size == 0:
        raise EmptyInputError("empty batch")
    return float(np.mean((p - t) ** 2))


# -- backward passes ------------------------------------------------------------

def _lstm_layer_backward(W, U, cache, dH):
    """Backprop through one unrolled LSTM layer.

    ``dH`` is dLoss/dh_t for every step, as seen from above the layer.
    Returns ``(dW, dU, db, dX)``.
    """
    X, steps = cache["X"], cache["steps"]
    B, T, _ = X.shape
    h = U.shape[1]
    dZ = np.empty((B, T, 4 * h))
    H_prev = np.empty((B, T, h))
    dh_next = np.zeros((B, h))
    dc_next = np.zeros((B, h))
    for t in reversed(range(T)):
        f, i, o, g, c_prev, tc, h_prev = steps[t]
        dh = dH[:, t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz = dZ[:, t]
        dz[:, :h] = dc * c_prev * f * (1.0 - f)
        dz[:, h:2 * h] = dc * g * i * (1.0 - i)
        dz[:, 2 * h:3 * h] = dh * tc * o * (1.0 - o)
        dz[:, 3 * h:] = dc * i * (1.0 - g * g)
        H_prev[:, t] = h_prev
        dh_next = dz @ U
        dc_next = dc * f
    flat = dZ.reshape(B * T, 4 * h)
    dW = flat.T @ X.reshape(B * T, -1)
    dU = flat.T @ H_prev.reshape(B * T, h)
    db = flat.sum(axis=0)
    dX = dZ @ W
    return dW, dU, db, dX


def _conv1d_backward(K, layer, dA):
    a, patches, inp = layer["a"], layer["patches"], layer["inp"]
    dz = dA * (1.0 - a * a)
    dK = np.einsum("btck,btf->fkc", patches, dz, optimize=True)
    db = dz.sum(axis=(0, 1))
    dX = np.zeros_like(inp)
    t_out = dz.shape[1]
    for j in range(K.shape[1]):
        dX[:, j:j + t_out] += dz @ K[:, j, :]
    return dK, db, dX


def backward(spec, params, X, y, masks=None):
    """Exact gradients of the batch-mean squared error.

    Returns ``(grads, loss)`` where ``grads`` maps every parameter block
    name to an array of the same shape. ``masks`` are the dropout
    multipliers applied in the training-mode forward pass.
    """
    # overflow surfaces as non-finite values, which train() checks for
    with np.errstate(over="ignore", invalid="ignore"):
        return _backward(spec, params, X, y, masks)


def _backward(spec, params, X, y, masks):
    y = np.asarray(y, dtype=np.float64).ravel()
    pred, cache = forward_train(spec, params, X, masks)
    if y.size != pred.size:
        raise ShapeError(f"{pred.size} windows but {y.size} targets")
    B = y.size
    masks = cache["masks"]
    err = pred - y
    loss = float(np.mean(err ** 2))
    dy = (2.0 / B) * err[:, None]

    grads = {}
    feats = cache["features"]
    grads["head.W"] = dy.T @ feats
    grads["head.b"] = dy.sum(axis=0)
    d = dy @ params["head.W"]

    if spec.kind == "lstm":
        last = len(spec.layers) - 1
        T = spec.window_length
        for l in reversed(range(len(spec.layers))):
            if f"lstm{l}" in masks:
                d = d * masks[f"lstm{l}"]
            if l == last:
                dH = np.zeros((B, T, spec.layers[l]))
                dH[:, -1] = d
            else:
                dH = d
            dW, dU, db, d = _lstm_layer_backward(params[f"lstm{l}.W"], params[f"lstm{l}.U"], cache["layers"][l], dH)
            grads[f"lstm{l}.W"], grads[f"lstm{l}.U"], grads[f"lstm{l}.b"] = dW, dU, db
    elif spec.kind == "mlp":
        for l in reversed(range(len(spec.layers))):
            layer = cache["layers"][l]
            if f"dense{l}" in masks:
                d = d * masks[f"dense{l}"]
            dz = d * (1.0 - layer["a"] ** 2)
            grads[f"dense{l}.W"] = dz.T @ layer["inp"]
            grads[f"dense{l}.b"] = dz.sum(axis=0)
            d = dz @ params[f"dense{l}.W"]
    else:
        last = len(spec.layers) - 1
        for l in reversed(range(len(spec.layers))):
            layer = cache["layers"][l]
            if l == last:
                if "pool" in masks:
                    d = d * masks["pool"]
                t_out = layer["a"].shape[1]
                d = np.repeat(d[:, None, :] / t_out, t_out, axis=1)
            if f"conv{l}" in masks:
                d = d * masks[f"conv{l}"]
            grads[f"conv{l}.K"], grads[f"conv{l}.b"], d = _conv1d_backward(params[f"conv{l}.K"], layer, d)

    return {name: grads[name] for name in params}, loss


# -- gradient checking ------------------------------------------------------------

@dataclass
class GradCheckReport:
    max_rel_error: float
    block_errors: dict
    tolerance: float
    n_checked: int

    @property
    def passed(self):
        return self.max_rel_error < self.tolerance


# extended precision where the platform has it; the finite-difference quotient
# of a float64 loss carries ~1e-11 of rounding noise at epsilon 1e-5, which
# swamps the smaller gradient coordinates of deep narrow stacks
ORACLE_DTYPE = np.longdouble if np.finfo(np.longdouble).eps < np.finfo(np.float64).eps else np.float64


def reference_loss(spec, blocks, X, y, dtype=ORACLE_DTYPE):
    """Inference-mode batch MSE evaluated independently in ``dtype``.

    A plain re-statement of the forward pass (no caches, no masks) used as
    the finite-difference oracle by :func:`grad_check`.
    """
    P = {k: np.asarray(v, dtype=dtype) for k, v in blocks.items()}
    X = np.asarray(X, dtype=dtype)
    sig = lambda z: 1 / (1 + np.exp(-z))
    if spec.kind == "lstm":
        seq = X
        for l, h in enumerate(spec.layers):
            W, U, b = P[f"lstm{l}.W"], P[f"lstm{l}.U"], P[f"lstm{l}.b"]
            hs = np.zeros((X.shape[0], h), dtype=dtype)
            cs = np.zeros_like(hs)
            outs = []
            for t in range(seq.shape[1]):
                z = seq[:, t] @ W.T + hs @ U.T + b
                f, i, o, g = sig(z[:, :h]), sig(z[:, h:2 * h]), sig(z[:, 2 * h:3 * h]), np.tanh(z[:, 3 * h:])
                cs = f * cs + i * g
                hs = o * np.tanh(cs)
                outs.append(hs)
            seq = np.stack(outs, axis=1)
        feats = seq[:, -1]
    elif spec.kind == "mlp":
        feats = X.reshape(X.shape[0], -1)
        for l in range(len(spec.layers)):
            feats = np.tanh(feats @ P[f"dense{l}.W"].T + P[f"dense{l}.b"])
    else:
        seq = X
        for l in range(len(spec.layers)):
            K, b = P[f"conv{l}.K"], P[f"conv{l}.b"]
            k = K.shape[1]
            steps = [np.tensordot(seq[:, t:t + k], K, axes=([1, 2], [1, 2])) for t in range(seq.shape[1] - k + 1)]
            seq = np.tanh(np.stack(steps, axis=1) + b)
        feats = seq.mean(axis=1)
    pred = feats @ P["head.W"][0] + P["head.b"][0]
    err = pred - np.asarray(y, dtype=dtype).ravel()
    return np.mean(err * err)


def grad_check(spec, params, X, y, epsilon=1e-5, tolerance=1e-4, max_coords=None, rng=None, dtype=ORACLE_DTYPE):
    """Compare :func:`backward` with central differences of the loss.

    The difference quotient is taken on :func:`reference_loss` in ``dtype``
    (extended precision by default; pass ``np.float64`` to difference the
    float64 forward pass instead). Dropout is off. With ``max_coords`` set,
    that many coordinates are sampled per block (using ``rng``) instead of
    checking all of them. Relative error is ``|a - n| / max(|a|, |n|, 1e-12)``.
    """
    X = np.asarray(X, dtype=np.float64)
    analytic, _ = backward(spec, params, X, y)
    rng = rng or RngState(0)
    blocks = {k: np.array(v, dtype=dtype) for k, v in params.items()}
    eps = np.asarray(epsilon, dtype=dtype)

    block_errors = {}
    n_checked = 0
    for name, arr in blocks.items():
        flat = arr.reshape(-1)
        idx = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            idx = np.sort(rng.generator.choice(flat.size, size=max_coords, replace=False))
        worst = 0.0
        a_flat = analytic[name].reshape(-1)
        for j in idx:
            orig = flat[j]
            flat[j] = orig + eps
            up = reference_loss(spec, blocks, X, y, dtype)
            flat[j] = orig - eps
            down = reference_loss(spec, blocks, X, y, dtype)
            flat[j] = orig
            num = float((up - down) / (2 * eps))
            a = a_flat[j]
            rel = abs(a - num) / max(abs(a), abs(num), 1e-12)
            worst = max(worst, rel)
        block_errors[name] = worst
        n_checked += idx.size
    return GradCheckReport(max(block_errors.values()), block_errors, tolerance, n_checked)


# -- optimizers -------------------------------------------------------------------

class SGD:
    def __init__(self, lr=0.01):
        self.lr = lr

    def step(self, params, grads, names):
        for k in names:
            params.blocks[k] -= self.lr * grads[k]


class Adam:
    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params, grads, names):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k in names:
            g = grads[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(g)
                self.v[k] = np.zeros_like(g)
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * (g * g)
            params.blocks[k] -= self.lr * (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2) + self.eps)


def clip_global_norm(grads, max_norm):
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        grads = {k: g * scale for k, g in grads.items()}
    return grads, total


# -- training loop ----------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 35
    learning_rate: float = 0.001
    optimizer: str = "adam"
    dropout: float = 0.2
    seed: int = 1
    shuffle_batches: bool = False
    clip_norm: float | None = None
    frozen: tuple = ()  # block-name prefixes excluded from updates

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.clip_norm is not None and not self.clip_norm > 0:
            raise ValueError("clip_norm must be > 0")

    def to_dict(self):
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "optimizer": self.optimizer,
            "dropout": self.dropout,
            "seed": self.seed,
            "shuffle_batches": self.shuffle_batches,
            "clip_norm": self.clip_norm,
            "frozen": list(self.frozen),
        }


@dataclass
class TrainReport:
    losses: list
    wall_time: float
    seed: int
    params: object = field(repr=False, default=None)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("epoch,loss\n")
            for e, loss in enumerate(self.losses, start=1):
                fh.write(f"{e},{loss!r}\n")


def sample_masks(spec, batch, rate, rng):
    """Inverted-dropout multipliers (0 or 1/(1-rate)) for every dropout site."""
    keep = 1.0 - rate
    return {name: rng.bernoulli_mask(keep, shape) / keep for name, shape in dropout_sites(spec, batch).items()}


def train(spec, data, cfg=TrainConfig(), params=None):
    """Fit ``spec`` to a windowed dataset. Fully determined by ``cfg.seed``.

    Initial parameters come from ``init_params(spec, RngState(cfg.seed))``
    unless ``params`` is given; the same stream then drives dropout masks and
    optional batch shuffling. Raises :class:`DivergenceError` on a
    non-finite loss.
    """
    n = len(data)
    if n == 0:
        raise EmptyDatasetError("no training windows")
    start = time.perf_counter()
    rng = RngState(cfg.seed)
    params = init_params(spec, rng) if params is None else params.copy()
    opt = Adam(cfg.learning_rate) if cfg.optimizer == "adam" else SGD(cfg.learning_rate)
    names = [k for k in params if not any(k.startswith(p) for p in cfg.frozen)]

    losses = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle_batches else np.arange(n)
        total = 0.0
        for s in range(0, n, cfg.batch_size):
            idx = order[s:s + cfg.batch_size]
            masks = sample_masks(spec, idx.size, cfg.dropout, rng) if cfg.dropout > 0 else None
            try:
                grads, loss = backward(spec, params, data.inputs[idx], data.targets[idx], masks)
            except ArithmeticError as exc:
                raise DivergenceError(f"epoch {epoch + 1}: {exc}") from exc
            if not np.isfinite(loss) or not all(np.isfinite(g).all() for g in grads.values()):
                raise DivergenceError(f"epoch {epoch + 1}: non-finite loss {loss}")
            if cfg.clip_norm is not None:
                grads, _ = clip_global_norm(grads, cfg.clip_norm)
            opt.step(params, grads, names)
            total += loss * idx.size
        losses.append(total / n)
    return params, TrainReport(losses, time.perf_counter() - start, cfg.seed, params)


@dataclass(frozen=True)
class Forecast:
    """One-step-ahead predictions in price units, aligned with their targets."""

    values: np.ndarray
    scaled: np.ndarray
    positions: np.ndarray
    dates: tuple = ()

    def __len__(self):
        return self.values.shape[0]


def predict_series(spec, params, dataset, scaler, target="close", batch=512):
    """Predict every window of ``dataset`` and map back to price units."""
    if dataset.inputs.shape[1:] != (spec.window_length, spec.n_features):
        raise ShapeError(f"dataset windows {dataset.inputs.shape[1:]} do not fit spec "
                         f"({spec.window_length}, {spec.n_features})")
    chunks = [forward_batch(spec, params, dataset.inputs[s:s + batch]) for s in range(0, len(dataset), batch)]
    scaled = np.concatenate(chunks) if chunks else np.empty(0)
    name = target if target in scaler.feature_names else scaler.feature_names[0]
    values = inverse_transform_feature(scaler, name, scaled)
    return Forecast(values, scaled, dataset.positions, dataset.dates)
