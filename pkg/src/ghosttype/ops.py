"""Dense-array primitives with hand-written backward passes.

Every primitive comes as a ``<name>`` forward and a ``<name>_backward``
that maps the upstream gradient back onto the inputs.  There is no tape:
the model chains these explicitly, which keeps every gradient path
auditable against the finite-difference checker in :mod:`.gradcheck`.

Shapes follow numpy row-major convention; batched inputs put the batch
on the leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NumericsError(FloatingPointError):
    """A forward or backward value came out NaN/Inf."""


def check_finite(x: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NumericsError(f"non-finite values in {what}")
    return x


@dataclass
class Parameter:
    """A learnable array plus its gradient accumulator."""

    name: str
    value: np.ndarray
    grad: np.ndarray

    def __post_init__(self) -> None:
        if self.value.shape != self.grad.shape:
            raise ValueError(f"{self.name}: grad shape {self.grad.shape} != value shape {self.value.shape}")

    @classmethod
    def zeros(cls, name: str, shape: tuple[int, ...], dtype=np.float32) -> "Parameter":
        return cls(name, np.zeros(shape, dtype=dtype), np.zeros(shape, dtype=dtype))

    @classmethod
    def uniform(cls, name: str, shape: tuple[int, ...], fan_in: int, rng: np.random.Generator,
                dtype=np.float32) -> "Parameter":
        # conventional +-1/sqrt(fan_in) init, seeded through rng
        bound = 1.0 / np.sqrt(float(fan_in))
        value = rng.uniform(-bound, bound, size=shape).astype(dtype)
        return cls(name, value, np.zeros(shape, dtype=dtype))

    def zero_grad(self) -> None:
        self.grad[...] = 0


# ---------------------------------------------------------------- matmul

def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def matmul_backward(dout: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    da = dout @ b.T
    db = a.reshape(-1, a.shape[-1]).T @ dout.reshape(-1, dout.shape[-1])
    return da, db.reshape(b.shape)


# -------------------------------------------------------------- add bias

def add_bias(x: np.ndarray, b: np.ndarray) -> np.ndarray:
    if x.shape[-1] != b.shape[-1] or b.ndim != 1:
        raise ValueError(f"bias shape {b.shape} does not match input {x.shape}")
    return x + b


def add_bias_backward(dout: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    axes = tuple(range(dout.ndim - 1))
    return dout, dout.sum(axis=axes)


# ----------------------------------------------------------- activations

def sigmoid(x: np.ndarray) -> np.ndarray:
    # clamp keeps exp() in range; sigmoid saturates to 0/1 well before +-40
    out = np.empty_like(x)
    np.clip(x, -40.0, 40.0, out=out)
    np.negative(out, out=out)
    np.exp(out, out=out)
    out += 1.0
    np.reciprocal(out, out=out)
    return out


def sigmoid_backward(dout: np.ndarray, out: np.ndarray) -> np.ndarray:
    return dout * out * (1.0 - out)


def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)


def tanh_backward(dout: np.ndarray, out: np.ndarray) -> np.ndarray:
    return dout * (1.0 - out * out)


# ---------------------------------------------------------- concat/slice

def concat(parts: list[np.ndarray], axis: int = -1) -> np.ndarray:
    return np.concatenate(parts, axis=axis)


def concat_backward(dout: np.ndarray, sizes: list[int], axis: int = -1) -> list[np.ndarray]:
    splits = np.cumsum(sizes[:-1])
    return np.split(dout, splits, axis=axis)


def take_slice(x: np.ndarray, start: int, stop: int, axis: int = -1) -> np.ndarray:
    index = [slice(None)] * x.ndim
    index[axis] = slice(start, stop)
    return x[tuple(index)]


def take_slice_backward(dout: np.ndarray, x_shape: tuple[int, ...], start: int, stop: int,
                        axis: int = -1) -> np.ndarray:
    dx = np.zeros(x_shape, dtype=dout.dtype)
    index = [slice(None)] * len(x_shape)
    index[axis] = slice(start, stop)
    dx[tuple(index)] = dout
    return dx


# ------------------------------------------------------------- embedding

def embedding_lookup(table: np.ndarray, indices: np.ndarray) -> np.ndarray:
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= table.shape[0]):
        raise IndexError(f"embedding index out of range 0..{table.shape[0] - 1}")
    return table[indices]


def embedding_lookup_backward(dout: np.ndarray, table_shape: tuple[int, ...],
                              indices: np.ndarray) -> np.ndarray:
    dtable = np.zeros(table_shape, dtype=dout.dtype)
    np.add.at(dtable, np.asarray(indices).reshape(-1), dout.reshape(-1, table_shape[1]))
    return dtable


# --------------------------------------------------------------- softmax

def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_backward(dout: np.ndarray, out: np.ndarray, axis: int = -1) -> np.ndarray:
    inner = (dout * out).sum(axis=axis, keepdims=True)
    return out * (dout - inner)


def softmax_cross_entropy(logits: np.ndarray, targets: np.ndarray,
                          ignore_index: int | None = None) -> tuple[float, np.ndarray, int]:
    """Mean cross-entropy over rows whose target != ignore_index.

    ``logits`` is (N, K), ``targets`` (N,).  Returns (loss, dlogits, n_used)
    where dlogits is already scaled for the mean; rows with an ignored
    target get zero gradient.  With every row ignored the loss is 0.
    """
    if logits.ndim != 2 or targets.shape != (logits.shape[0],):
        raise ValueError(f"bad shapes: logits {logits.shape}, targets {targets.shape}")
    targets = np.asarray(targets)
    if targets.size and (targets.min() < 0 or targets.max() >= logits.shape[1]):
        raise IndexError("target index out of range")
    used = np.ones(targets.shape[0], dtype=bool) if ignore_index is None else targets != ignore_index
    n_used = int(used.sum())
    probs = softmax(logits, axis=-1)
    dlogits = probs.copy()
    rows = np.arange(logits.shape[0])
    dlogits[rows, targets] -= 1.0
    if n_used == 0:
        return 0.0, np.zeros_like(logits), 0
    dlogits[~used] = 0.0
    dlogits /= n_used
    shifted = logits - logits.max(axis=-1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=-1))
    nll = logz - shifted[rows, targets]
    loss = float(nll[used].sum() / n_used)
    check_finite(np.asarray(loss), "cross-entropy loss")
    return loss, dlogits, n_used
