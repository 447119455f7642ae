"""Dense math kernels, stable log-domain primitives, and a splittable RNG.

Everything here is pure: given the same inputs (including the RNG stream
state) the outputs are bit-identical. Probability arithmetic stays in the
log domain; probabilities are materialized only at sampling points.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DimensionError",
    "RngStream",
    "affine",
    "sigmoid",
    "log_sigmoid",
    "log_softmax",
    "logsumexp",
    "bernoulli_sample",
    "categorical_sample",
]

_MASK64 = (1 << 64) - 1


class DimensionError(ValueError):
    """Shapes of the named operands do not line up."""


def affine(weight: np.ndarray, x: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Return weight @ x + bias, checking shapes before multiplying."""
    weight = np.asarray(weight, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if weight.ndim != 2:
        raise DimensionError(f"affine: weight must be a matrix, got ndim={weight.ndim}")
    if x.shape != (weight.shape[1],):
        raise DimensionError(
            f"affine: weight has {weight.shape[1]} columns but x has shape {x.shape}"
        )
    if bias.shape != (weight.shape[0],):
        raise DimensionError(
            f"affine: weight has {weight.shape[0]} rows but bias has shape {bias.shape}"
        )
    return weight @ x + bias


def sigmoid(z):
    """Logistic function 1/(1+exp(-z)), never exponentiating a large positive arg."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out) if out.ndim == 0 else out


def log_sigmoid(z):
    """log(sigmoid(z)) via min(z,0) - log1p(exp(-|z|)); finite for all finite z."""
    z = np.asarray(z, dtype=np.float64)
    out = np.minimum(z, 0.0) - np.log1p(np.exp(-np.abs(z)))
    return float(out) if out.ndim == 0 else out


def logsumexp(z) -> float:
    """Max-stabilized log(sum(exp(z))); -inf only when every entry is -inf."""
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise ValueError("logsumexp: empty input")
    m = np.max(z)
    if not np.isfinite(m):
        # all -inf, or a +inf/nan entry dominates
        return float(m)
    return float(m + np.log(np.sum(np.exp(z - m))))


def log_softmax(z) -> np.ndarray:
    """z - logsumexp(z); outputs exponentiate-and-sum to 1."""
    z = np.asarray(z, dtype=np.float64)
    return z - logsumexp(z)


def log_softmax_rows(z: np.ndarray) -> np.ndarray:
    """Row-wise log_softmax for a 2-D block of logits."""
    z = np.asarray(z, dtype=np.float64)
    m = np.max(z, axis=-1, keepdims=True)
    return z - m - np.log(np.sum(np.exp(z - m), axis=-1, keepdims=True))


def bernoulli_sample(p: float, rng: "RngStream") -> int:
    """Draw one bit that is 1 with probability p."""
    return int(rng.uniform() < p)


def categorical_sample(logp, rng: "RngStream") -> int:
    """Inverse-CDF draw from normalized log-probabilities.

    The final cumulative bucket absorbs rounding residue, and zero-probability
    entries collapse so the lowest admissible index wins.
    """
    cum = np.cumsum(np.exp(np.asarray(logp, dtype=np.float64)))
    idx = int(np.searchsorted(cum, rng.uniform(), side="right"))
    return min(idx, cum.size - 1)


def _fold_field(h: int, field) -> int:
    """Mix one stream-derivation field (int or str) into a 64-bit hash."""
    if isinstance(field, str):
        # FNV-1a over utf-8; Python's hash() is salted per process
        v = 0xCBF29CE484222325
        for byte in field.encode("utf-8"):
            v = ((v ^ byte) * 0x100000001B3) & _MASK64
        field = v
    z = (h + int(field)) & _MASK64
    # splitmix64 finalizer
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class RngStream:
    """Counter-based splittable random stream.

    A stream is fully identified by ``(seed, stream_id)``: the same pair
    always reproduces the same draw sequence, and distinct stream ids give
    statistically independent streams (Philox counter-based generator).
    Streams are never shared between concurrent consumers; derive a child
    stream per (example, epoch, purpose) instead.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        self._gen = np.random.Generator(
            np.random.Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        )

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def derive(self, *fields) -> "RngStream":
        """Child stream keyed by the given ints/strings; independent of self."""
        h = self.stream_id
        for field in fields:
            h = _fold_field(h, field)
        return RngStream(self.seed, h)

    def uniform(self, size=None):
        """U[0,1) doubles."""
        return self._gen.random(size)

    def normal(self, scale: float = 1.0, size=None):
        return self._gen.normal(0.0, scale, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)
