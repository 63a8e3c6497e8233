"""Optimization: Adam, the adaptive-lr early-stopping fit loop, and the
ablation matrix runner.

The learning-rate rule is unusual but deliberate: a new validation
minimum multiplies lr by (1 + lr_rate), any other epoch multiplies it by
(1 - lr_rate), and training stops after `patience` epochs without a new
minimum.  The returned model always carries the minimum-validation-loss
weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .chars import DICTIONARY
from .data import Dataset
from .metrics import evaluate
from .model import (
    VARIANT_DND,
    VARIANT_GAUSSIAN,
    ModelConfig,
    NeuralDecoder,
)
from .ops import NumericsError, Parameter


class TrainError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    initial_lr: float = 0.001
    lr_rate: float = 0.1
    patience: int = 10
    batch_size: int = 32
    max_epochs: int = 200
    clip_norm: float = 5.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.lr_rate < 1.0:
            raise ValueError("lr_rate must lie in (0, 1)")
        if self.patience < 1 or self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("patience, batch_size and max_epochs must be >= 1")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")


class Adam:
    """Standard Adam with bias correction; moments keyed per parameter."""

    beta1 = 0.9
    beta2 = 0.999
    eps = 1e-8

    def __init__(self, params: list[Parameter]) -> None:
        self.params = params
        self.m = [np.zeros_like(p.value) for p in params]
        self.v = [np.zeros_like(p.value) for p in params]
        self.t = 0

    def step(self, lr: float) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            if not np.all(np.isfinite(g)):
                raise NumericsError(f"non-finite gradient in {p.name}")
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * np.square(g)
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.value -= (lr * update).astype(p.value.dtype, copy=False)


def clip_gradients(params: list[Parameter], max_norm: float) -> float:
    """Scale all grads so their global L2 norm is at most max_norm."""
    total = 0.0
    for p in params:
        total += float(np.sum(np.square(p.grad, dtype=np.float64)))
    norm = float(np.sqrt(total))
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for p in params:
            p.grad *= scale
    return norm


def build_windows(ds: Dataset, window: int, dtype=np.float32):
    """Per-phrase training windows: (points (n,2), labels (n,)), n <= window."""
    out = []
    for s in ds.samples:
        pts = np.array([[p.x, p.y] for p in s.touches], dtype=dtype)[:window]
        labels = np.array(DICTIONARY.encode(s.phrase), dtype=np.int64)[:window]
        out.append((pts, labels))
    return out


def _pad_batch(items, pad_index: int, dtype):
    """Stack variable-length windows into (T, B, 2) + labels + mask."""
    t_max = max(len(p) for p, _ in items)
    b = len(items)
    xs = np.zeros((t_max, b, 2), dtype=dtype)
    labels = np.full((t_max, b), pad_index, dtype=np.int64)
    mask = np.zeros((t_max, b, 1), dtype=dtype)
    for k, (pts, lab) in enumerate(items):
        n = len(pts)
        xs[:n, k, :] = pts
        labels[:n, k] = lab
        mask[:n, k, 0] = 1.0
    return xs, labels, mask


def _dataset_loss(model: NeuralDecoder, windows, batch_size: int) -> float:
    """Weighted mean loss over fixed-order batches (weights = label steps)."""
    total = 0.0
    steps = 0
    pad = DICTIONARY.pad_index
    for start in range(0, len(windows), batch_size):
        chunk = windows[start : start + batch_size]
        xs, labels, mask = _pad_batch(chunk, pad, model.dtype)
        n = int((labels != pad).sum())
        total += model.loss_value(xs, labels, mask) * n
        steps += n
    return total / max(steps, 1)


def fit(train_ds: Dataset, val_ds: Dataset, cfg: TrainConfig,
        checkpoint_path=None, log_stream=None):
    """Train to the minimum-validation-loss weights.

    Returns (model, log) where log is a list of per-epoch records
    {epoch, train_loss, val_loss, lr, is_best}.  When checkpoint_path is
    given, every new validation minimum is saved there; log_stream (a
    text file object) receives each record as a JSON line.
    """
    from .checkpoint import save_checkpoint

    if len(train_ds) == 0 or len(val_ds) == 0:
        raise TrainError("train and validation splits must be non-empty")
    model = NeuralDecoder(cfg.model, seed=cfg.seed)
    windows = build_windows(train_ds, cfg.model.window, model.dtype)
    val_windows = build_windows(val_ds, cfg.model.window, model.dtype)
    params = model.parameters()
    adam = Adam(params)
    rng = np.random.default_rng(cfg.seed)
    pad = DICTIONARY.pad_index

    lr = cfg.initial_lr
    best_val = np.inf
    best_epoch = 0
    best_state = [p.value.copy() for p in params]
    since_best = 0
    log: list[dict] = []

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(windows))
        total = 0.0
        steps = 0
        for start in range(0, len(order), cfg.batch_size):
            chunk = [windows[i] for i in order[start : start + cfg.batch_size]]
            xs, labels, mask = _pad_batch(chunk, pad, model.dtype)
            model.zero_grads()
            try:
                loss, _, _ = model.loss_and_grads(xs, labels, mask)
            except NumericsError as e:
                raise TrainError(f"epoch {epoch}: {e}") from e
            clip_gradients(params, cfg.clip_norm)
            adam.step(lr)
            n = int((labels != pad).sum())
            total += loss * n
            steps += n
        train_loss = total / max(steps, 1)
        val_loss = _dataset_loss(model, val_windows, cfg.batch_size)
        if not np.isfinite(val_loss):
            raise TrainError(
                f"validation loss diverged at epoch {epoch} (value {val_loss}); log so far: {log}")

        is_best = val_loss < best_val
        record = {"epoch": epoch, "train_loss": round(train_loss, 6),
                  "val_loss": round(val_loss, 6), "lr": round(lr, 10), "is_best": is_best}
        log.append(record)
        if log_stream is not None:
            log_stream.write(json.dumps(record, sort_keys=True) + "\n")
        if is_best:
            best_val = val_loss
            best_epoch = epoch
            best_state = [p.value.copy() for p in params]
            since_best = 0
            lr *= 1.0 + cfg.lr_rate
            if checkpoint_path is not None:
                save_checkpoint(model, checkpoint_path, epoch=epoch,
                                metrics={"val_loss": round(val_loss, 6)})
        else:
            since_best += 1
            lr *= 1.0 - cfg.lr_rate
        if since_best >= cfg.patience:
            break

    for p, value in zip(params, best_state):
        p.value[...] = value
    if checkpoint_path is not None:
        # rewrite so the file matches the returned weights even when the
        # last save predates later epochs in the header metrics
        save_checkpoint(model, checkpoint_path, epoch=best_epoch,
                        metrics={"val_loss": round(float(best_val), 6)})
    return model, log


ABLATION_COLUMNS = ("model", "parameters", "cer", "wer", "ms_per_word")

DEFAULT_MATRIX = (
    (VARIANT_DND, 2, 64, True),
    (VARIANT_DND, 2, 64, False),
    ("bi-rnn", 3, 32, False),
    ("uni-rnn", 3, 64, False),
    ("bi-rnn", 2, 64, False),
)


def cell_label(variant: str, stacks: int, units: int, aux: bool) -> str:
    tag = f"s{stacks}u{units}"
    if variant == VARIANT_DND and aux:
        tag += "au"
    return f"{variant} {tag}"


def run_ablation(matrix, train_ds: Dataset, val_ds: Dataset, test_ds: Dataset,
                 seed: int = 0, max_epochs: int = 30, window: int = 64,
                 progress=None, keep_models: dict | None = None) -> list[dict]:
    """Train and evaluate every (variant, stacks, units, aux) cell.

    When ``keep_models`` is given, the fitted decoder of each cell is
    stored there under its row label.
    """
    from .baseline import GaussianBaseline

    rows = []
    for variant, stacks, units, aux in matrix:
        label = cell_label(variant, stacks, units, aux)
        if progress is not None:
            progress(f"cell {label}")
        if variant == VARIANT_GAUSSIAN:
            decoder = GaussianBaseline.fit(train_ds)
            n_params = decoder.n_params()
        else:
            mc = ModelConfig(variant=variant, dec_stacks=stacks, units=units,
                             window=window,
                             aux_loss_weight=1.0 if (aux and variant == VARIANT_DND) else 0.0)
            tc = TrainConfig(model=mc, max_epochs=max_epochs, seed=seed)
            decoder, _ = fit(train_ds, val_ds, tc)
            n_params = decoder.n_params()
        if keep_models is not None:
            keep_models[label] = decoder
        report = evaluate(decoder, test_ds)
        rows.append({"model": label, "parameters": n_params,
                     "cer": round(report.cer, 2), "wer": round(report.wer, 2),
                     "ms_per_word": round(report.ms_per_word, 3)})
    return rows


def ablation_csv(rows: list[dict]) -> str:
    lines = [",".join(ABLATION_COLUMNS)]
    for r in rows:
        lines.append(",".join(str(r[c]) for c in ABLATION_COLUMNS))
    return "\n".join(lines) + "\n"
