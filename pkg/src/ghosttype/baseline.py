"""Classical per-symbol Gaussian decoder.

Fits one axis-aligned bivariate Gaussian per typeable symbol over pooled
touch positions and decodes each point independently by maximum
likelihood.  No language prior, no per-user adaptation: its collapse on
drifting multi-user data is exactly the failure mode the neural decoder
exists to fix.
"""

from __future__ import annotations

import numpy as np

from .chars import DICTIONARY
from .data import Dataset

_VAR_FLOOR = 1e-12


class GaussianBaseline:
    """means/variances are (30, 2) over the typeable symbols in dictionary order."""

    def __init__(self, means: np.ndarray, variances: np.ndarray) -> None:
        n = len(DICTIONARY.typeable)
        if means.shape != (n, 2) or variances.shape != (n, 2):
            raise ValueError(f"expected ({n}, 2) means/variances")
        if np.any(variances <= 0):
            raise ValueError("variances must be positive")
        self.means = means.astype(np.float64)
        self.variances = variances.astype(np.float64)

    @classmethod
    def fit(cls, train: Dataset) -> "GaussianBaseline":
        n = len(DICTIONARY.typeable)
        buckets: list[list[tuple[float, float]]] = [[] for _ in range(n)]
        for s in train.samples:
            for ch, p in zip(s.phrase, s.touches):
                buckets[DICTIONARY.index_of(ch)].append((p.x, p.y))
        missing = [DICTIONARY.typeable[i] for i in range(n) if len(buckets[i]) < 2]
        if missing:
            raise ValueError(f"symbols with fewer than 2 training touches: {missing!r}")
        means = np.empty((n, 2))
        variances = np.empty((n, 2))
        for i, pts in enumerate(buckets):
            arr = np.asarray(pts)
            means[i] = arr.mean(axis=0)
            variances[i] = np.maximum(arr.var(axis=0), _VAR_FLOOR)
        return cls(means, variances)

    def n_params(self) -> int:
        return self.means.size + self.variances.size

    def decode_indices(self, points: np.ndarray) -> np.ndarray:
        """Per-point argmax of the diagonal-Gaussian log likelihood."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError("need an (n, 2) array with n >= 1")
        # log N(p; mu, diag(var)) up to the shared -log(2*pi) constant
        diff = pts[:, None, :] - self.means[None, :, :]
        ll = -0.5 * (np.square(diff) / self.variances[None, :, :]
                     + np.log(self.variances)[None, :, :]).sum(axis=2)
        return np.argmax(ll, axis=1)

    def decode_text(self, points: np.ndarray) -> str:
        return DICTIONARY.decode(self.decode_indices(points))
