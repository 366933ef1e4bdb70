"""Dense float64 kernels, activations and the seeded random source.

A "matrix" here is simply a 2-D ``numpy.ndarray`` of dtype float64 in C
(row-major) order. The functions below add the shape and finiteness checks
the rest of the package relies on; the heavy lifting is numpy's.

Randomness comes from numpy's Philox4x64 counter-based bit generator, which
produces the same stream for the same seed on every platform numpy supports.
"""

import numpy as np

from .errors import InvalidRange, NonFiniteError, ShapeError


def as_matrix(x):
    """Coerce ``x`` to a C-contiguous 2-D float64 array (vectors become rows)."""
    m = np.ascontiguousarray(x, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got array of shape {m.shape}")
    return m


def _finite(out, op):
    if not np.isfinite(out).all():
        raise NonFiniteError(f"{op} produced non-finite values")
    return out


def matmul(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = a @ b
    return _finite(out, "matmul")


def hadamard(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"hadamard needs equal shapes, got {a.shape} and {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = a * b
    return _finite(out, "hadamard")


def sigmoid(x):
    """Logistic function, evaluated without overflow for large ``|x|``."""
    x = np.asarray(x, dtype=np.float64)
    _finite(x, "sigmoid input")
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def tanh_act(x):
    x = np.asarray(x, dtype=np.float64)
    _finite(x, "tanh input")
    return np.tanh(x)


class RngState:
    """Single-owner seeded random stream (Philox4x64-10, counter based).

    Not safe to share between threads; give each run its own instance.
    """

    def __init__(self, seed=0):
        self.seed = int(seed)
        if not 0 <= self.seed < 2**64:
            raise InvalidRange(f"seed must fit in 64 unsigned bits, got {seed}")
        self.generator = np.random.Generator(np.random.Philox(key=self.seed))

    def uniform(self, lo, hi, shape):
        return rng_uniform(self, lo, hi, shape)

    def bernoulli_mask(self, keep, shape):
        """0/1 float mask where each entry is 1 with probability ``keep``."""
        return (self.generator.random(shape) < keep).astype(np.float64)

    def permutation(self, n):
        return self.generator.permutation(n)


def rng_uniform(state, lo, hi, shape):
    """Draw an array of ``shape`` uniformly from ``[lo, hi)``, advancing ``state``."""
    if not lo < hi:
        raise InvalidRange(f"need lo < hi, got lo={lo}, hi={hi}")
    u = state.generator.random(shape)
    out = lo + (hi - lo) * u
    # guards against rounding up to hi for wide ranges
    return np.minimum(out, np.nextafter(hi, lo))
