"""Finite-difference gradient verification."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .ops import Parameter


def grad_check(
    f: Callable[[], float],
    params: list[Parameter],
    epsilon: float = 1e-5,
    loss_only: Callable[[], float] | None = None,
    max_entries_per_param: int | None = None,
    seed: int = 0,
) -> float:
    """Compare analytic gradients against central finite differences.

    ``f`` must zero nothing itself: it runs forward + backward once,
    accumulating gradients into ``params`` (which this function zeroes
    first), and returns the scalar loss.  ``loss_only``, when given, is a
    cheaper forward-only evaluation used for the difference quotients.

    Returns the max over checked entries of
    ``|analytic - central_difference| / max(1, |analytic|)``.
    ``max_entries_per_param`` bounds the per-tensor entry count (seeded
    deterministic sample); None checks every entry.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError(f"epsilon {epsilon} outside [1e-7, 1e-3]")
    loss_fn = loss_only if loss_only is not None else f
    for p in params:
        p.zero_grad()
    base = f()
    if not np.isfinite(base):
        raise FloatingPointError(f"non-finite loss {base} in grad check")
    analytic = [p.grad.copy() for p in params]

    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, grad in zip(params, analytic):
        flat_v = p.value.reshape(-1)
        flat_g = grad.reshape(-1)
        n = flat_v.shape[0]
        if max_entries_per_param is None or n <= max_entries_per_param:
            picks = range(n)
        else:
            picks = np.sort(rng.choice(n, size=max_entries_per_param, replace=False))
        for i in picks:
            orig = flat_v[i]
            flat_v[i] = orig + epsilon
            up = loss_fn()
            flat_v[i] = orig - epsilon
            down = loss_fn()
            flat_v[i] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise FloatingPointError(f"non-finite loss while perturbing {p.name}[{i}]")
            numeric = (up - down) / (2.0 * epsilon)
            a = float(flat_g[i])
            err = abs(a - numeric) / max(1.0, abs(a))
            if err > worst:
                worst = err
    return worst
