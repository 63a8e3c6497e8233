"""Edit-distance quality metrics and timed evaluation.

CER and WER are micro-averaged over a whole test set: total edit
distance divided by total reference length, times 100.  Decode timing is
measured phrase by phrase on a single thread without batching.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .chars import DICTIONARY
from .data import Dataset

_WORD_SPLIT = re.compile(r"[ \n]+")


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Minimum insertions + deletions + substitutions turning a into b."""
    if len(a) < len(b):
        a, b = b, a
    if len(b) == 0:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def words(text: str) -> list[str]:
    """Maximal runs between spaces and enters; period/apostrophe stay attached."""
    return [w for w in _WORD_SPLIT.split(text) if w]


def cer(decoded: str, truth: str) -> float:
    if len(truth) == 0:
        raise ValueError("ground truth phrase is empty")
    return 100.0 * levenshtein(decoded, truth) / len(truth)


def wer(decoded: str, truth: str) -> float:
    truth_words = words(truth)
    if not truth_words:
        raise ValueError("ground truth phrase has no words")
    return 100.0 * levenshtein(words(decoded), truth_words) / len(truth_words)


def wpm(phrase: str, minutes: float) -> float:
    """Words per minute with the 5-characters-per-word convention."""
    if minutes <= 0:
        raise ValueError("elapsed minutes must be positive")
    if len(phrase) < 1:
        raise ValueError("phrase must have at least one character")
    return (len(phrase) - 1) / minutes / 5.0


@dataclass(frozen=True)
class EvalReport:
    cer: float
    wer: float
    ms_per_word: float
    n_phrases: int
    n_chars: int
    n_words: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def format_text(self) -> str:
        return (f"phrases={self.n_phrases} chars={self.n_chars} words={self.n_words} "
                f"cer={self.cer:.2f} wer={self.wer:.2f} ms_per_word={self.ms_per_word:.3f}")


def evaluate(decoder, test_ds: Dataset) -> EvalReport:
    """Decode every phrase and micro-average CER/WER.

    ``decoder`` needs a ``decode_indices((n, 2) array) -> indices``
    method.  Timing covers only the decode calls, pinned to one BLAS
    thread so reported ms/word is comparable across machines.
    """
    if len(test_ds) == 0:
        raise ValueError("empty test set")
    dist_c = dist_w = len_c = len_w = 0
    seconds = 0.0
    with threadpool_limits(limits=1):
        for s in test_ds.samples:
            pts = np.array([[p.x, p.y] for p in s.touches], dtype=np.float32)
            t0 = time.perf_counter()
            idx = decoder.decode_indices(pts)
            seconds += time.perf_counter() - t0
            decoded = DICTIONARY.decode(idx)
            truth_words = words(s.phrase)
            dist_c += levenshtein(decoded, s.phrase)
            dist_w += levenshtein(words(decoded), truth_words)
            len_c += len(s.phrase)
            len_w += len(truth_words)
    return EvalReport(
        cer=100.0 * dist_c / len_c,
        wer=100.0 * dist_w / len_w,
        ms_per_word=1000.0 * seconds / len_w,
        n_phrases=len(test_ds),
        n_chars=len_c,
        n_words=len_w,
    )
