"""Network definitions: stacked LSTM, MLP and 1D-CNN regressors.

Every network maps a window of shape ``(window_length, n_features)`` to one
scalar (the next scaled close) through a final dense layer.

Parameters live in an ordered name -> array mapping (:class:`NetworkParams`).
An LSTM layer ``l`` owns three blocks with the four gates stacked row-wise
in the order forget, input, output, candidate::

    lstm{l}.W  (4h, in)    input-to-gate
    lstm{l}.U  (4h, h)     recurrent
    lstm{l}.b  (4h,)       bias

so ``W[:h]`` is the forget-gate input matrix, ``W[h:2h]`` the input gate,
and so on. Dense layers are ``dense{l}.W (out, in)`` / ``dense{l}.b``, conv
layers ``conv{l}.K (filters, kernel, in_channels)`` / ``conv{l}.b`` and the
output layer is ``head.W (1, in)`` / ``head.b (1,)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .numerics import hadamard, matmul, sigmoid, tanh_act

KINDS = ("lstm", "mlp", "cnn1d")
DEFAULT_LAYERS = {"lstm": (70, 70, 70), "mlp": (64, 32), "cnn1d": (32,)}
GATES = ("f", "i", "o", "c")


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture. For ``cnn1d`` the layer sizes are the filter counts."""

    kind: str = "lstm"
    layers: tuple = DEFAULT_LAYERS["lstm"]
    window_length: int = 30
    n_features: int = 1
    dropout: float = 0.0
    kernel_size: int = 5

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(int(u) for u in self.layers))
        if self.kind not in KINDS:
            raise ValueError(f"unknown network kind {self.kind!r}; choose from {KINDS}")
        if not self.layers or min(self.layers) < 1:
            raise ValueError(f"need at least one hidden layer of positive width, got {self.layers}")
        if self.window_length < 1 or self.n_features < 1:
            raise ValueError("window_length and n_features must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.kind == "cnn1d":
            if self.kernel_size < 1:
                raise ValueError("kernel_size must be positive")
            if self.window_length - len(self.layers) * (self.kernel_size - 1) < 1:
                raise ShapeError(
                    f"window {self.window_length} too short for {len(self.layers)} conv layers of kernel {self.kernel_size}")

    @classmethod
    def default(cls, kind, **kw):
        return cls(kind=kind, layers=kw.pop("layers", DEFAULT_LAYERS[kind]), **kw)

    def to_dict(self):
        return {
            "kind": self.kind,
            "layers": list(self.layers),
            "window_length": self.window_length,
            "n_features": self.n_features,
            "dropout": self.dropout,
            "kernel_size": self.kernel_size,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in ("kind", "layers", "window_length", "n_features", "dropout", "kernel_size")})


def block_shapes(spec):
    """Ordered ``[(block_name, shape, fan_in), ...]`` for ``spec``."""
    shapes = []
    if spec.kind == "lstm":
        n_in = spec.n_features
        for l, h in enumerate(spec.layers):
            fan = n_in + h
            shapes += [(f"lstm{l}.W", (4 * h, n_in), fan), (f"lstm{l}.U", (4 * h, h), fan), (f"lstm{l}.b", (4 * h,), fan)]
            n_in = h
    elif spec.kind == "mlp":
        n_in = spec.window_length * spec.n_features
        for l, h in enumerate(spec.layers):
            shapes += [(f"dense{l}.W", (h, n_in), n_in), (f"dense{l}.b", (h,), n_in)]
            n_in = h
    else:
        n_in = spec.n_features
        for l, f in enumerate(spec.layers):
            fan = spec.kernel_size * n_in
            shapes += [(f"conv{l}.K", (f, spec.kernel_size, n_in), fan), (f"conv{l}.b", (f,), fan)]
            n_in = f
    shapes += [("head.W", (1, n_in), n_in), ("head.b", (1,), n_in)]
    return shapes


def count_params(spec):
    """Total scalar count and the per-layer breakdown ``[(layer, count), ...]``.

    Uses the closed forms 4h(in + h + 1) per LSTM layer, in*out + out per
    dense layer and kernel*in_channels*filters + filters per conv layer.
    """
    breakdown = []
    if spec.kind == "lstm":
        n_in = spec.n_features
        for l, h in enumerate(spec.layers):
            breakdown.append((f"lstm{l}", 4 * h * (n_in + h + 1)))
            n_in = h
    elif spec.kind == "mlp":
        n_in = spec.window_length * spec.n_features
        for l, h in enumerate(spec.layers):
            breakdown.append((f"dense{l}", n_in * h + h))
            n_in = h
    else:
        n_in = spec.n_features
        for l, f in enumerate(spec.layers):
            breakdown.append((f"conv{l}", spec.kernel_size * n_in * f + f))
            n_in = f
    breakdown.append(("head", n_in * 1 + 1))
    return sum(n for _, n in breakdown), breakdown


@dataclass(frozen=True)
class LstmCellWeights:
    """One LSTM layer, gates stacked as forget / input / output / candidate."""

    W: np.ndarray
    U: np.ndarray
    b: np.ndarray

    @classmethod
    def from_gates(cls, W_f, W_i, W_o, W_c, U_f, U_i, U_o, U_c, b_f, b_i, b_o, b_c):
        W = np.vstack([np.atleast_2d(m) for m in (W_f, W_i, W_o, W_c)]).astype(np.float64)
        U = np.vstack([np.atleast_2d(m) for m in (U_f, U_i, U_o, U_c)]).astype(np.float64)
        b = np.concatenate([np.atleast_1d(v) for v in (b_f, b_i, b_o, b_c)]).astype(np.float64)
        return cls(W, U, b)

    @property
    def hidden(self):
        return self.U.shape[1]

    @property
    def n_inputs(self):
        return self.W.shape[1]

    def gate(self, name):
        """``(W_g, U_g, b_g)`` for gate ``name`` in ``'fioc'``."""
        h = self.hidden
        k = GATES.index(name)
        s = slice(k * h, (k + 1) * h)
        return self.W[s], self.U[s], self.b[s]

    W_f = property(lambda self: self.gate("f")[0])
    W_i = property(lambda self: self.gate("i")[0])
    W_o = property(lambda self: self.gate("o")[0])
    W_c = property(lambda self: self.gate("c")[0])
    U_f = property(lambda self: self.gate("f")[1])
    U_i = property(lambda self: self.gate("i")[1])
    U_o = property(lambda self: self.gate("o")[1])
    U_c = property(lambda self: self.gate("c")[1])
    b_f = property(lambda self: self.gate("f")[2])
    b_i = property(lambda self: self.gate("i")[2])
    b_o = property(lambda self: self.gate("o")[2])
    b_c = property(lambda self: self.gate("c")[2])

    def param_count(self):
        return self.W.size + self.U.size + self.b.size


@dataclass(frozen=True)
class LstmStepState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden):
        return cls(np.zeros(hidden), np.zeros(hidden))


def lstm_step(weights, x, prev):
    """Advance one LSTM cell by one time step.

    f = sigmoid(W_f x + U_f h + b_f), likewise i and o; candidate
    c~ = tanh(W_c x + U_c h + b_c); then c' = f*c + i*c~ and h' = o*tanh(c').
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1, 1)
    h = np.asarray(prev.h, dtype=np.float64).reshape(-1, 1)
    c = np.asarray(prev.c, dtype=np.float64).reshape(-1, 1)
    if x.shape[0] != weights.n_inputs or h.shape[0] != weights.hidden or c.shape[0] != weights.hidden:
        raise ShapeError(
            f"cell expects x of {weights.n_inputs} and state of {weights.hidden}, got {x.shape[0]}/{h.shape[0]}/{c.shape[0]}")

    def pre(g):
        W, U, b = weights.gate(g)
        return matmul(W, x) + matmul(U, h) + b.reshape(-1, 1)

    f, i, o = sigmoid(pre("f")), sigmoid(pre("i")), sigmoid(pre("o"))
    cand = tanh_act(pre("c"))
    c_new = hadamard(f, c) + hadamard(i, cand)
    h_new = hadamard(o, tanh_act(c_new))
    return LstmStepState(h_new.ravel(), c_new.ravel())


class NetworkParams:
    """Ordered mapping of block name -> float64 array."""

    def __init__(self, blocks):
        self.blocks = {k: np.ascontiguousarray(v, dtype=np.float64) for k, v in blocks.items()}

    def __getitem__(self, name):
        return self.blocks[name]

    def __iter__(self):
        return iter(self.blocks)

    def items(self):
        return self.blocks.items()

    def size(self):
        return sum(v.size for v in self.blocks.values())

    def copy(self):
        return NetworkParams({k: v.copy() for k, v in self.blocks.items()})

    def lstm_layer(self, l):
        return LstmCellWeights(self[f"lstm{l}.W"], self[f"lstm{l}.U"], self[f"lstm{l}.b"])

    def tobytes(self):
        return b"".join(v.tobytes() for v in self.blocks.values())

    def __eq__(self, other):
        return (isinstance(other, NetworkParams) and list(self.blocks) == list(other.blocks)
                and all(np.array_equal(v, other.blocks[k]) for k, v in self.blocks.items()))

    def __repr__(self):
        return f"NetworkParams({', '.join(f'{k}{v.shape}' for k, v in self.blocks.items())})"


def zero_params(spec):
    return NetworkParams({name: np.zeros(shape) for name, shape, _ in block_shapes(spec)})


def init_params(spec, rng):
    """Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; LSTM forget-gate biases start at 1."""
    blocks = {}
    for name, shape, fan_in in block_shapes(spec):
        k = 1.0 / np.sqrt(fan_in)
        blocks[name] = rng.uniform(-k, k, shape)
        if name.startswith("lstm") and name.endswith(".b"):
            h = shape[0] // 4
            blocks[name][:h] = 1.0
    return NetworkParams(blocks)


# -- layer order for serialisation ------------------------------------------

LSTM_ORDER = ("W_f", "W_i", "W_o", "W_c", "U_f", "U_i", "U_o", "U_c", "b_f", "b_i", "b_o", "b_c")


def layer_names(spec):
    names = []
    for name, _, _ in block_shapes(spec):
        layer = name.split(".")[0]
        if layer not in names:
            names.append(layer)
    return names


def params_to_layers(spec, params):
    """One flat weight list per layer, blocks concatenated in declaration order.

    Because gate rows are stacked f, i, o, c, flattening ``W`` then ``U``
    then ``b`` row-major yields exactly the ``LSTM_ORDER`` sequence.
    """
    out = []
    for layer in layer_names(spec):
        blocks = [(n, s) for n, s, _ in block_shapes(spec) if n.split(".")[0] == layer]
        flat = np.concatenate([params[n].ravel() for n, _ in blocks])
        order = list(LSTM_ORDER) if layer.startswith("lstm") else [n.split(".")[1] for n, _ in blocks]
        out.append({"name": layer, "order": order, "weights": [float(v) for v in flat]})
    return out


def params_from_layers(spec, layers):
    by_name = {d["name"]: np.asarray(d["weights"], dtype=np.float64) for d in layers}
    blocks = {}
    offsets = {}
    for name, shape, _ in block_shapes(spec):
        layer = name.split(".")[0]
        if layer not in by_name:
            raise ShapeError(f"missing weights for layer {layer!r}")
        start = offsets.get(layer, 0)
        n = int(np.prod(shape))
        chunk = by_name[layer][start:start + n]
        if chunk.size != n:
            raise ShapeError(f"layer {layer!r} has too few weights for block {name} {shape}")
        blocks[name] = chunk.reshape(shape)
        offsets[layer] = start + n
    for layer, flat in by_name.items():
        if offsets.get(layer, 0) != flat.size:
            raise ShapeError(f"layer {layer!r}: expected {offsets.get(layer, 0)} weights, found {flat.size}")
    return NetworkParams(blocks)


# -- batched forward passes ---------------------------------------------------
#
# These return the prediction vector plus a cache consumed by the hand-written
# backward pass in ``training``. ``masks`` maps a dropout site name to an
# already-rescaled (inverted-dropout) multiplier; ``None`` means inference.

def dropout_sites(spec, batch):
    """Dropout site name -> mask shape. Recurrent connections are never masked."""
    T = spec.window_length
    sites = {}
    if spec.kind == "lstm":
        last = len(spec.layers) - 1
        for l, h in enumerate(spec.layers):
            sites[f"lstm{l}"] = (batch, h) if l == last else (batch, T, h)
    elif spec.kind == "mlp":
        for l, h in enumerate(spec.layers):
            sites[f"dense{l}"] = (batch, h)
    else:
        t_out = T
        for l, f in enumerate(spec.layers[:-1]):
            t_out -= spec.kernel_size - 1
            sites[f"conv{l}"] = (batch, t_out, f)
        sites["pool"] = (batch, spec.layers[-1])
    return sites


def _check_batch(spec, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[1:] != (spec.window_length, spec.n_features):
        raise ShapeError(f"expected batch of shape (B, {spec.window_length}, {spec.n_features}), got {X.shape}")
    return X


def lstm_layer_forward(W, U, b, X):
    """Unroll one LSTM layer over ``X`` of shape ``(B, T, in)``.

    Returns all hidden states ``(B, T, h)`` and the per-step cache.
    """
    B, T, _ = X.shape
    h = U.shape[1]
    pre_x = X @ W.T + b
    H = np.empty((B, T, h))
    h_prev = np.zeros((B, h))
    c_prev = np.zeros((B, h))
    steps = []
    for t in range(T):
        z = pre_x[:, t] + h_prev @ U.T
        s = sigmoid(z[:, : 3 * h])
        g = tanh_act(z[:, 3 * h:])
        f, i, o = s[:, :h], s[:, h:2 * h], s[:, 2 * h:]
        c = f * c_prev + i * g
        tc = np.tanh(c)
        hh = o * tc
        steps.append((f, i, o, g, c_prev, tc, h_prev))
        H[:, t] = hh
        h_prev, c_prev = hh, c
    return H, {"X": X, "steps": steps}


def conv1d_forward(K, b, X):
    """Valid-mode 1-D convolution: ``(B, T, C)`` -> ``(B, T - k + 1, F)``."""
    k = K.shape[1]
    patches = np.lib.stride_tricks.sliding_window_view(X, k, axis=1)  # (B, T', C, k)
    return np.einsum("btck,fkc->btf", patches, K, optimize=True) + b, patches


def forward_train(spec, params, X, masks=None):
    """Batched forward pass with cache. Returns ``(predictions (B,), cache)``."""
    X = _check_batch(spec, X)
    masks = masks or {}
    cache = {"X": X, "masks": masks, "layers": []}
    inp = X
    if spec.kind == "lstm":
        last = len(spec.layers) - 1
        for l in range(len(spec.layers)):
            H, lc = lstm_layer_forward(params[f"lstm{l}.W"], params[f"lstm{l}.U"], params[f"lstm{l}.b"], inp)
            out = H if l < last else H[:, -1]
            if f"lstm{l}" in masks:
                out = out * masks[f"lstm{l}"]
            cache["layers"].append(lc)
            inp = out
    elif spec.kind == "mlp":
        inp = X.reshape(X.shape[0], -1)
        for l in range(len(spec.layers)):
            a = tanh_act(inp @ params[f"dense{l}.W"].T + params[f"dense{l}.b"])
            cache["layers"].append({"inp": inp, "a": a})
            inp = a * masks[f"dense{l}"] if f"dense{l}" in masks else a
    else:
        last = len(spec.layers) - 1
        for l in range(len(spec.layers)):
            z, patches = conv1d_forward(params[f"conv{l}.K"], params[f"conv{l}.b"], inp)
            a = tanh_act(z)
            cache["layers"].append({"inp": inp, "patches": patches, "a": a})
            inp = a * masks[f"conv{l}"] if f"conv{l}" in masks else a
            if l == last:
                inp = inp.mean(axis=1)
                if "pool" in masks:
                    inp = inp * masks["pool"]
    cache["features"] = inp
    y = inp @ params["head.W"].T + params["head.b"]
    return y[:, 0], cache


def forward_batch(spec, params, X):
    """Inference-mode predictions for a batch of windows ``(B, T, F)``."""
    return forward_train(spec, params, X)[0]


def forward(spec, params, window):
    """Inference-mode prediction (scaled units) for one window ``(T, F)``."""
    w = np.asarray(window, dtype=np.float64)
    if w.ndim == 1 and spec.n_features == 1:
        w = w.reshape(-1, 1)
    if w.shape != (spec.window_length, spec.n_features):
        raise ShapeError(f"window must be ({spec.window_length}, {spec.n_features}), got {w.shape}")
    return float(forward_batch(spec, params, w[None])[0])
