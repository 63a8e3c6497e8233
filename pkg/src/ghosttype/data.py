"""Core dataset types and the line-delimited dataset file format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .chars import DICTIONARY, PAD

FORMAT_VERSION = 1


class DatasetFormatError(ValueError):
    """Malformed dataset file; carries the offending 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class ScreenSpec:
    """Physical screen the coordinates were normalized against.

    Defaults match a 23" touch monitor laid flat on a desk.
    """

    width_mm: float = 555.0
    height_mm: float = 338.0
    width_px: int = 1920
    height_px: int = 1080

    def mm_per_px(self) -> tuple[float, float]:
        return self.width_mm / self.width_px, self.height_mm / self.height_px

    def px_to_mm(self, x_px: float, y_px: float) -> tuple[float, float]:
        sx, sy = self.mm_per_px()
        return x_px * sx, y_px * sy

    def mm_to_norm(self, x_mm: float, y_mm: float) -> tuple[float, float]:
        return x_mm / self.width_mm, y_mm / self.height_mm

    def norm_to_mm(self, x: float, y: float) -> tuple[float, float]:
        return x * self.width_mm, y * self.height_mm


@dataclass(frozen=True)
class TouchPoint:
    """One keystroke: screen position normalized to [0, 1] per axis."""

    x: float
    y: float
    t_ms: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"touch coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class TouchSample:
    """A phrase paired one-to-one with its touch sequence."""

    user_id: str
    phrase: str
    touches: tuple[TouchPoint, ...]

    def __post_init__(self) -> None:
        if len(self.phrase) == 0:
            raise ValueError("empty sample")
        if len(self.phrase) != len(self.touches):
            raise ValueError(
                f"phrase length {len(self.phrase)} != touch count {len(self.touches)}"
            )
        if PAD in self.phrase:
            raise ValueError("padding symbol is not allowed in phrase text")
        for c in self.phrase:
            DICTIONARY.index_of(c)
        last = None
        for p in self.touches:
            if p.t_ms is not None:
                if last is not None and p.t_ms < last:
                    raise ValueError("touch timestamps must be non-decreasing")
                last = p.t_ms


@dataclass(frozen=True)
class Dataset:
    samples: tuple[TouchSample, ...] = ()
    screen: ScreenSpec = field(default_factory=ScreenSpec)

    def __len__(self) -> int:
        return len(self.samples)

    def users(self) -> list[str]:
        """Distinct user ids in first-appearance order."""
        seen: dict[str, None] = {}
        for s in self.samples:
            seen.setdefault(s.user_id, None)
        return list(seen)

    def keystrokes(self) -> int:
        return sum(len(s.touches) for s in self.samples)

    def restrict(self, user_ids) -> "Dataset":
        wanted = set(user_ids)
        return Dataset(tuple(s for s in self.samples if s.user_id in wanted), self.screen)


def _sample_to_record(sample: TouchSample) -> dict:
    touches = []
    for p in sample.touches:
        touches.append([p.x, p.y] if p.t_ms is None else [p.x, p.y, p.t_ms])
    return {"user_id": sample.user_id, "phrase": sample.phrase, "touches": touches}


def write_dataset(ds: Dataset, path: str | Path) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "screen_mm": [ds.screen.width_mm, ds.screen.height_mm],
        "screen_px": [ds.screen.width_px, ds.screen.height_px],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for sample in ds.samples:
            fh.write(json.dumps(_sample_to_record(sample)) + "\n")


def read_dataset(path: str | Path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DatasetFormatError(1, "missing header record")

    def parse(line_no: int, text: str) -> dict:
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(line_no, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise DatasetFormatError(line_no, "record is not an object")
        return obj

    header = parse(1, lines[0])
    try:
        if header["format_version"] != FORMAT_VERSION:
            raise DatasetFormatError(1, f"unsupported format_version {header['format_version']}")
        screen = ScreenSpec(
            width_mm=float(header["screen_mm"][0]),
            height_mm=float(header["screen_mm"][1]),
            width_px=int(header["screen_px"][0]),
            height_px=int(header["screen_px"][1]),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise DatasetFormatError(1, f"bad header: {exc!r}") from exc

    samples = []
    for line_no, text in enumerate(lines[1:], start=2):
        if not text.strip():
            continue
        rec = parse(line_no, text)
        try:
            touches = tuple(
                TouchPoint(float(t[0]), float(t[1]), float(t[2]) if len(t) > 2 else None)
                for t in rec["touches"]
            )
            samples.append(TouchSample(str(rec["user_id"]), rec["phrase"], touches))
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise DatasetFormatError(line_no, f"bad sample record: {exc}") from exc
    return Dataset(tuple(samples), screen)


def split_dataset(
    ds: Dataset, n_test_users: int = 2, n_val_users: int = 1, seed: int = 0
) -> tuple[Dataset, Dataset, Dataset]:
    """Deterministic user-disjoint (train, val, test) split.

    Users are shuffled with the given seed; the first ``n_test_users`` form
    the test set and the next ``n_val_users`` the validation set.
    """
    import numpy as np

    users = sorted(ds.users())
    if len(users) < n_test_users + n_val_users + 1:
        raise ValueError(
            f"need at least {n_test_users + n_val_users + 1} users for this split, "
            f"got {len(users)}"
        )
    order = list(np.random.default_rng(seed).permutation(len(users)))
    shuffled = [users[i] for i in order]
    test_users = shuffled[:n_test_users]
    val_users = shuffled[n_test_users : n_test_users + n_val_users]
    train_users = shuffled[n_test_users + n_val_users :]
    return ds.restrict(train_users), ds.restrict(val_users), ds.restrict(test_users)
