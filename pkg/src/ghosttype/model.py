"""The neural touch-sequence decoder and its ablation variants.

Three trainable variants share one substrate:

* ``uni-rnn``  - input projection, forward-only GRU stack, output map.
* ``bi-rnn``   - input projection, bidirectional GRU stack, output map.
* ``dnd``      - the full two-stage decoder: a bidirectional positional
  decoding stack produces intermediate per-step character logits; those
  are re-embedded (soft probability-weighted mixture while training, hard
  argmax embedding at inference) and refined by a character-language-model
  stack before the final output map.  The intermediate logits also carry
  an auxiliary cross-entropy loss that keeps the deep stack trainable.

The backward pass is chained by hand stage by stage; no graph framework.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .chars import DICTIONARY
from .data import TouchPoint
from .gru import BiGru, GruDirection, GruParams
from .ops import (
    Parameter,
    softmax,
    softmax_backward,
    softmax_cross_entropy,
)

VARIANT_DND = "dnd"
VARIANT_BI = "bi-rnn"
VARIANT_UNI = "uni-rnn"
VARIANT_GAUSSIAN = "gaussian-baseline"
VARIANTS = (VARIANT_DND, VARIANT_BI, VARIANT_UNI, VARIANT_GAUSSIAN)


@dataclass(frozen=True)
class ModelConfig:
    variant: str = VARIANT_DND
    dec_stacks: int = 2
    clm_stacks: int = 2
    units: int = 64
    embed_dim: int = 16
    dict_size: int = 31
    window: int = 64
    aux_loss_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        for name in ("dec_stacks", "clm_stacks", "units", "embed_dim", "dict_size", "window"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.aux_loss_weight < 0:
            raise ValueError("aux_loss_weight must be >= 0")

    def cell_name(self, aux: bool | None = None) -> str:
        """Ablation cell id, e.g. s2u64au."""
        if aux is None:
            aux = self.variant == VARIANT_DND and self.aux_loss_weight > 0
        return f"s{self.dec_stacks}u{self.units}" + ("au" if aux else "")


class _Cache:
    __slots__ = ("xs", "mask", "proj", "dec", "dec_out", "probs", "emb_in", "clm", "clm_out",
                 "train_mode")

    def __init__(self) -> None:
        self.dec = []
        self.clm = []


def _linear(x: np.ndarray, w: Parameter, b: Parameter) -> np.ndarray:
    flat = x.reshape(-1, x.shape[-1])
    return (flat @ w.value + b.value).reshape(x.shape[:-1] + (w.value.shape[1],))


def _linear_backward(dout: np.ndarray, x: np.ndarray, w: Parameter, b: Parameter) -> np.ndarray:
    flat_d = dout.reshape(-1, dout.shape[-1])
    flat_x = x.reshape(-1, x.shape[-1])
    w.grad += flat_x.T @ flat_d
    b.grad += flat_d.sum(axis=0)
    return (flat_d @ w.value.T).reshape(x.shape)


class NeuralDecoder:
    """Trainable decoder over (x, y) touch sequences."""

    def __init__(self, config: ModelConfig, seed: int = 0, dtype=np.float32) -> None:
        if config.variant == VARIANT_GAUSSIAN:
            raise ValueError("the gaussian baseline is not a neural model; see baseline.py")
        self.config = config
        self.seed = seed
        self.dtype = dtype
        rng = np.random.default_rng(seed)
        c = config
        self.in_w = Parameter.uniform("in.w", (2, c.embed_dim), 2, rng, dtype)
        self.in_b = Parameter.zeros("in.b", (c.embed_dim,), dtype)

        self.dec_layers: list = []
        fan = c.embed_dim
        for i in range(c.dec_stacks):
            if c.variant == VARIANT_UNI:
                layer = GruDirection(GruParams.init(f"dec{i}", fan, c.units, rng, dtype))
                fan = c.units
            else:
                layer = BiGru.init(f"dec{i}", fan, c.units, rng, dtype)
                fan = 2 * c.units
            self.dec_layers.append(layer)
        dec_out_dim = fan

        if c.variant == VARIANT_DND:
            self.inter_w = Parameter.uniform("inter.w", (dec_out_dim, c.dict_size), dec_out_dim, rng, dtype)
            self.inter_b = Parameter.zeros("inter.b", (c.dict_size,), dtype)
            self.embed = Parameter.uniform("embed", (c.dict_size, c.embed_dim), c.embed_dim, rng, dtype)
            self.clm_layers = []
            fan = c.embed_dim
            for i in range(c.clm_stacks):
                self.clm_layers.append(BiGru.init(f"clm{i}", fan, c.units, rng, dtype))
                fan = 2 * c.units
            out_in = fan
        else:
            self.inter_w = self.inter_b = self.embed = None
            self.clm_layers = []
            out_in = dec_out_dim
        self.out_w = Parameter.uniform("out.w", (out_in, c.dict_size), out_in, rng, dtype)
        self.out_b = Parameter.zeros("out.b", (c.dict_size,), dtype)

    # ------------------------------------------------------------ plumbing

    def parameters(self) -> list[Parameter]:
        params = [self.in_w, self.in_b]
        for layer in self.dec_layers:
            params.extend(layer.parameters())
        if self.config.variant == VARIANT_DND:
            params.extend([self.inter_w, self.inter_b, self.embed])
            for layer in self.clm_layers:
                params.extend(layer.parameters())
        params.extend([self.out_w, self.out_b])
        return params

    def zero_grads(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def n_params(self) -> int:
        return sum(p.value.size for p in self.parameters())

    # ------------------------------------------------------------- forward

    def forward_arrays(self, xs: np.ndarray, mask: np.ndarray | None, train_mode: bool):
        """Run the network over (T, B, 2) inputs.

        Returns (intermediate_logits, final_logits, cache); the
        intermediate entry is None for the single-stage variants.
        """
        cache = _Cache()
        cache.xs = xs
        cache.mask = mask
        cache.train_mode = train_mode
        h = _linear(xs, self.in_w, self.in_b)
        cache.proj = h
        for layer in self.dec_layers:
            h, c = layer.forward(h, mask)
            cache.dec.append(c)
        cache.dec_out = h
        if self.config.variant != VARIANT_DND:
            final = _linear(h, self.out_w, self.out_b)
            return None, final, cache

        inter = _linear(h, self.inter_w, self.inter_b)
        if train_mode:
            probs = softmax(inter, axis=-1)
            cache.probs = probs
            flat = probs.reshape(-1, self.config.dict_size)
            emb_in = (flat @ self.embed.value).reshape(inter.shape[:-1] + (self.config.embed_dim,))
        else:
            cache.probs = None
            idx = np.argmax(inter, axis=-1)
            emb_in = self.embed.value[idx]
        cache.emb_in = emb_in
        g = emb_in
        for layer in self.clm_layers:
            g, c = layer.forward(g, mask)
            cache.clm.append(c)
        cache.clm_out = g
        final = _linear(g, self.out_w, self.out_b)
        return inter, final, cache

    def backward_arrays(self, cache: _Cache, d_inter: np.ndarray | None, d_final: np.ndarray) -> None:
        """Accumulate parameter gradients for the training-mode forward."""
        if self.config.variant == VARIANT_DND:
            if not cache.train_mode:
                raise ValueError("backward requires a train-mode forward (soft embedding path)")
            d = _linear_backward(d_final, cache.clm_out, self.out_w, self.out_b)
            for layer, c in zip(reversed(self.clm_layers), reversed(cache.clm)):
                d = layer.backward(c, d)
            # soft mixture: emb_in = probs @ E
            flat_d = d.reshape(-1, self.config.embed_dim)
            flat_p = cache.probs.reshape(-1, self.config.dict_size)
            self.embed.grad += flat_p.T @ flat_d
            dprobs = (flat_d @ self.embed.value.T).reshape(cache.probs.shape)
            d_inter_total = softmax_backward(dprobs, cache.probs, axis=-1)
            if d_inter is not None:
                d_inter_total = d_inter_total + d_inter
            d = _linear_backward(d_inter_total, cache.dec_out, self.inter_w, self.inter_b)
        else:
            d = _linear_backward(d_final, cache.dec_out, self.out_w, self.out_b)
        for layer, c in zip(reversed(self.dec_layers), reversed(cache.dec)):
            d = layer.backward(c, d)
        _linear_backward(d, cache.xs, self.in_w, self.in_b)

    def forward(self, touches, train_mode: bool = False):
        """Decode one window; ``touches`` is a sequence of TouchPoint or (n, 2).

        Returns (intermediate_logits, final_logits) with shape (n, dict_size);
        the intermediate entry is None for the single-stage variants.
        """
        xs = touch_array(touches, self.dtype)
        n = xs.shape[0]
        if n < 1:
            raise ValueError("cannot decode an empty touch sequence")
        if n > self.config.window:
            raise ValueError(f"sequence length {n} exceeds window {self.config.window}")
        inter, final, _ = self.forward_arrays(xs[:, None, :], None, train_mode)
        return (None if inter is None else inter[:, 0, :]), final[:, 0, :]

    # ---------------------------------------------------------------- loss

    def loss_and_grads(self, xs: np.ndarray, labels: np.ndarray, mask: np.ndarray | None,
                       aux_weight: float | None = None):
        """Forward + backward over one padded batch.

        ``labels`` is (T, B) with the padding index at masked steps.
        Returns (total, final_ce, aux_ce); gradients are accumulated into
        the parameters (call :meth:`zero_grads` first).
        """
        c = self.config
        if aux_weight is None:
            aux_weight = c.aux_loss_weight
        inter, final, cache = self.forward_arrays(xs, mask, train_mode=True)
        flat_labels = labels.reshape(-1)
        pad = c.dict_size - 1
        final_ce, d_final, _ = softmax_cross_entropy(
            final.reshape(-1, c.dict_size), flat_labels, ignore_index=pad)
        if inter is not None:
            aux_ce, d_aux, _ = softmax_cross_entropy(
                inter.reshape(-1, c.dict_size), flat_labels, ignore_index=pad)
            d_inter = (aux_weight * d_aux).reshape(inter.shape) if aux_weight != 0.0 else None
            total = final_ce + aux_weight * aux_ce
        else:
            aux_ce = 0.0
            d_inter = None
            total = final_ce
        self.backward_arrays(cache, d_inter, d_final.reshape(final.shape))
        return total, final_ce, aux_ce

    def loss_value(self, xs: np.ndarray, labels: np.ndarray, mask: np.ndarray | None,
                   aux_weight: float | None = None) -> float:
        """Forward-only total loss (same definition as loss_and_grads)."""
        c = self.config
        if aux_weight is None:
            aux_weight = c.aux_loss_weight
        inter, final, _ = self.forward_arrays(xs, mask, train_mode=True)
        flat_labels = labels.reshape(-1)
        pad = c.dict_size - 1
        final_ce, _, _ = softmax_cross_entropy(final.reshape(-1, c.dict_size), flat_labels,
                                               ignore_index=pad)
        if inter is None:
            return final_ce
        aux_ce, _, _ = softmax_cross_entropy(inter.reshape(-1, c.dict_size), flat_labels,
                                             ignore_index=pad)
        return final_ce + aux_weight * aux_ce

    # -------------------------------------------------------------- decode

    def decode_indices(self, points: np.ndarray) -> np.ndarray:
        """Decode an arbitrary-length (n, 2) sequence window by window."""
        points = np.asarray(points, dtype=self.dtype)
        if points.ndim != 2 or points.shape[0] < 1:
            raise ValueError("need at least one touch point")
        w = self.config.window
        out = []
        for start in range(0, points.shape[0], w):
            _, final = self.forward(points[start : start + w], train_mode=False)
            out.append(select(final))
        return np.concatenate(out)

    def decode_text(self, points: np.ndarray) -> str:
        return DICTIONARY.decode(self.decode_indices(points))


def select(logits: np.ndarray) -> np.ndarray:
    """Most-probable symbol per row; ties break to the lowest index."""
    logits = np.asarray(logits)
    if not np.all(np.isfinite(logits)):
        raise ValueError("non-finite logits")
    return np.argmax(logits, axis=-1)


def touch_array(touches, dtype=np.float32) -> np.ndarray:
    """Coerce TouchPoint sequences or (n, 2) arrays to a float array."""
    if isinstance(touches, np.ndarray):
        arr = touches.astype(dtype, copy=False)
    else:
        arr = np.array(
            [[p.x, p.y] if isinstance(p, TouchPoint) else [p[0], p[1]] for p in touches],
            dtype=dtype,
        )
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) touch array, got {arr.shape}")
    return arr


@dataclass
class DecodeState:
    """A live decoding session: sliding window plus its current decode."""

    window: int
    buffer: list[tuple[float, float]] = field(default_factory=list)
    decoded: str = ""


def decode_stream(model: NeuralDecoder, state: DecodeState, point) -> str:
    """Append one touch, evicting the oldest when full, and re-decode.

    The whole buffered window is decoded again, so earlier characters may
    legitimately change as the backward direction sees new context.  The
    state is updated in place; returns the new window decode.
    """
    if isinstance(point, TouchPoint):
        xy = (point.x, point.y)
    else:
        xy = (float(point[0]), float(point[1]))
    state.buffer.append(xy)
    if len(state.buffer) > state.window:
        del state.buffer[0]
    pts = np.array(state.buffer, dtype=model.dtype)
    _, final = model.forward(pts, train_mode=False)
    state.decoded = DICTIONARY.decode(select(final))
    return state.decoded


def config_to_dict(config: ModelConfig) -> dict:
    return asdict(config)


def config_from_dict(d: dict) -> ModelConfig:
    return ModelConfig(**d)
