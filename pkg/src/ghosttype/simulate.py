"""Synthetic eyes-free typing data.

Each simulated user carries a private mental image of a QWERTY keyboard:
the reference key grid warped by a per-user anisotropic scale, rotation,
and an offset that random-walks between phrases (hand drift).  Every tap
lands near the imagined key center with isotropic Gaussian noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .chars import DICTIONARY, ENTER, SPACE, preprocess_phrase
from .data import Dataset, ScreenSpec, TouchPoint, TouchSample

ROW_INDENTS = (0.0, 0.25, 0.75)
ROW_KEYS = ("qwertyuiop", "asdfghjkl'", "zxcvbnm.")


def base_template(width_mm: float, height_mm: float) -> dict[str, tuple[float, float]]:
    """Reference QWERTY key centers in mm, centered on the origin.

    Three staggered letter rows over 10 columns, enter hanging off the
    right end of the home row, space bar centered on a fourth row.  y
    grows downward to match screen coordinates.
    """
    pitch = width_mm / 10.0
    row_h = height_mm / 4.0
    centers: dict[str, tuple[float, float]] = {}
    for row, (indent, keys) in enumerate(zip(ROW_INDENTS, ROW_KEYS)):
        y = (row + 0.5) * row_h
        for i, ch in enumerate(keys):
            centers[ch] = ((indent + i + 0.5) * pitch, y)
    centers[ENTER] = ((ROW_INDENTS[1] + 10.5) * pitch, 1.5 * row_h)
    centers[SPACE] = (5.0 * pitch, 3.5 * row_h)
    out = {ch: (x - width_mm / 2.0, y - height_mm / 2.0) for ch, (x, y) in centers.items()}
    assert set(out) == set(DICTIONARY.typeable)
    return out


@dataclass
class SimConfig:
    n_users: int = 12
    phrases_per_user: int = 150
    scale_mean: tuple[float, float] = (0.96, 1.00)
    scale_std: tuple[float, float] = (0.16, 0.13)
    keyboard_mm: tuple[float, float] = (259.0, 125.9)
    offset_std_px: tuple[float, float] = (75.81, 44.69)
    tap_sigma_mm: float = 2.5
    drift_step_mm: float = 0.8
    rotation_range_deg: float = 15.0
    pair_fraction: float = 0.3
    seed: int = 0
    screen: ScreenSpec = field(default_factory=ScreenSpec)

    def __post_init__(self) -> None:
        if self.n_users < 1 or self.phrases_per_user < 1:
            raise ValueError("counts must be >= 1")
        for v in (*self.scale_std, *self.offset_std_px, self.tap_sigma_mm,
                  self.drift_step_mm, self.rotation_range_deg):
            if v < 0:
                raise ValueError("stds and ranges must be >= 0")
        if min(self.scale_mean) <= 0.5:
            raise ValueError("scale means must exceed the 0.5 truncation point")
        if not 0.0 <= self.pair_fraction <= 1.0:
            raise ValueError("pair_fraction must lie in [0, 1]")


@dataclass
class MentalModel:
    """One user's imagined keyboard plus their noise parameters.

    key_centers already include the user's scale and rotation and are
    positioned around the screen center (mm); offset_mm is the mutable
    drift state applied on top at typing time.
    """

    key_centers: dict[str, tuple[float, float]]
    scale_h: float
    scale_v: float
    rotation_deg: float
    offset_mm: np.ndarray
    tap_sigma_mm: float
    drift_step_mm: float

    def __post_init__(self) -> None:
        if self.scale_h <= 0 or self.scale_v <= 0:
            raise ValueError("scale factors must be positive")
        if self.tap_sigma_mm < 0:
            raise ValueError("tap_sigma_mm must be >= 0")
        if set(self.key_centers) != set(DICTIONARY.typeable):
            raise ValueError("key_centers must cover exactly the typeable symbols")
        self.offset_mm = np.asarray(self.offset_mm, dtype=np.float64)


def _truncated_normal(rng: np.random.Generator, mean: float, std: float, low: float) -> float:
    if std == 0.0:
        if mean <= low:
            raise ValueError(f"degenerate draw {mean} below truncation point {low}")
        return mean
    for _ in range(1000):
        v = rng.normal(mean, std)
        if v > low:
            return float(v)
    raise ValueError("truncated normal rejection did not converge")


def sample_mental_model(cfg: SimConfig, rng: np.random.Generator) -> MentalModel:
    """Draw one user: scale_h, scale_v, rotation, then offset x/y (in that order)."""
    scale_h = _truncated_normal(rng, cfg.scale_mean[0], cfg.scale_std[0], 0.5)
    scale_v = _truncated_normal(rng, cfg.scale_mean[1], cfg.scale_std[1], 0.5)
    r = cfg.rotation_range_deg
    rotation_deg = float(rng.uniform(-r, r)) if r > 0 else 0.0
    mm_per_px = (cfg.screen.width_mm / cfg.screen.width_px,
                 cfg.screen.height_mm / cfg.screen.height_px)
    offset = np.array([rng.normal(0.0, cfg.offset_std_px[0]) * mm_per_px[0],
                       rng.normal(0.0, cfg.offset_std_px[1]) * mm_per_px[1]])

    template = base_template(*cfg.keyboard_mm)
    theta = math.radians(rotation_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cx, cy = cfg.screen.width_mm / 2.0, cfg.screen.height_mm / 2.0
    centers = {}
    for ch, (x, y) in template.items():
        sx, sy = scale_h * x, scale_v * y
        centers[ch] = (cx + cos_t * sx - sin_t * sy, cy + sin_t * sx + cos_t * sy)
    return MentalModel(centers, scale_h, scale_v, rotation_deg, offset,
                       cfg.tap_sigma_mm, cfg.drift_step_mm)


def type_phrase(m: MentalModel, phrase: str, rng: np.random.Generator,
                screen: ScreenSpec = ScreenSpec(), user_id: str = "u00") -> TouchSample:
    """Tap out one phrase, then advance the drift random walk."""
    if not phrase:
        raise ValueError("cannot type an empty phrase")
    missing = sorted({ch for ch in phrase if ch not in m.key_centers})
    if missing:
        raise ValueError(f"no key center for symbols: {missing!r}")
    touches = []
    for ch in phrase:
        cx, cy = m.key_centers[ch]
        x_mm = cx + m.offset_mm[0]
        y_mm = cy + m.offset_mm[1]
        if m.tap_sigma_mm > 0:
            noise = rng.normal(0.0, m.tap_sigma_mm, size=2)
            x_mm += noise[0]
            y_mm += noise[1]
        x = min(1.0, max(0.0, x_mm / screen.width_mm))
        y = min(1.0, max(0.0, y_mm / screen.height_mm))
        touches.append(TouchPoint(x, y))
    if m.drift_step_mm > 0:
        m.offset_mm = m.offset_mm + rng.normal(0.0, m.drift_step_mm, size=2)
    return TouchSample(user_id=user_id, phrase=phrase, touches=tuple(touches))


def augment_offsets(d: Dataset, copies: int = 5,
                    max_offset_px: tuple[float, float] = (100.0, 60.0),
                    rng: np.random.Generator | None = None) -> Dataset:
    """Originals plus `copies` rigidly translated duplicates of every sample."""
    if copies < 1:
        raise ValueError("copies must be >= 1")
    rng = rng or np.random.default_rng(0)
    dx_max = max_offset_px[0] / d.screen.width_px
    dy_max = max_offset_px[1] / d.screen.height_px
    samples = list(d.samples)
    for _ in range(copies):
        for s in d.samples:
            dx = float(rng.uniform(-dx_max, dx_max))
            dy = float(rng.uniform(-dy_max, dy_max))
            moved = tuple(
                TouchPoint(min(1.0, max(0.0, p.x + dx)), min(1.0, max(0.0, p.y + dy)), p.t_ms)
                for p in s.touches)
            samples.append(replace(s, touches=moved))
    return Dataset(samples=tuple(samples), screen=d.screen)


def load_corpus(path) -> list[str]:
    """Plain-text corpus, one sentence per line, normalized to the dictionary."""
    phrases = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            phrases.append(preprocess_phrase(line))
    if not phrases:
        raise ValueError(f"corpus {path} has no usable sentences")
    return phrases


def bundled_corpus_path() -> str:
    from importlib.resources import files

    return str(files("ghosttype").joinpath("data/corpus.txt"))


def generate_dataset(cfg: SimConfig, phrases: list[str]) -> Dataset:
    """Simulate cfg.n_users users typing random corpus phrases.

    A pair_fraction share of selections joins two sentences with the
    enter symbol so the full dictionary appears in training data.
    """
    if not phrases:
        raise ValueError("empty phrase list")
    rng = np.random.default_rng(cfg.seed)
    samples = []
    for user in range(cfg.n_users):
        model = sample_mental_model(cfg, rng)
        uid = f"u{user:02d}"
        for _ in range(cfg.phrases_per_user):
            i = int(rng.integers(len(phrases)))
            if cfg.pair_fraction > 0 and rng.random() < cfg.pair_fraction:
                j = int(rng.integers(len(phrases)))
                phrase = preprocess_phrase(phrases[i], phrases[j])
            else:
                phrase = phrases[i]
            samples.append(type_phrase(model, phrase, rng, cfg.screen, user_id=uid))
    return Dataset(samples=tuple(samples), screen=cfg.screen)
