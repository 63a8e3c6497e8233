"""GRU cell, masked directional scans and the bidirectional layer.

Cell equations (reset gate applied inside the candidate's recurrent term):

    r  = sigmoid(x W_r + h U_r + b_r)
    z  = sigmoid(x W_z + h U_z + b_z)
    hc = tanh(x W_h + (r * h) U_h + b_h)
    h' = (1 - z) * h + z * hc

Gate weights are stored fused: ``w`` is (D, 3U) with columns ordered
r | z | h, ``u_rz`` is (U, 2U) and ``u_h`` (U, U).  Scans take an optional
per-step mask; masked steps pass the state through unchanged, which makes
a padded batch behave exactly like per-sequence unpadded runs (padding is
always trailing).  Backward passes accumulate into ``Parameter.grad``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ops import Parameter, check_finite, sigmoid


@dataclass
class GruParams:
    w: Parameter      # (D, 3U) input weights, gate order r|z|h
    u_rz: Parameter   # (U, 2U) recurrent weights for r and z
    u_h: Parameter    # (U, U) recurrent weights for the candidate
    b: Parameter      # (3U,) biases, gate order r|z|h

    @property
    def units(self) -> int:
        return self.u_h.value.shape[0]

    @property
    def fan_in(self) -> int:
        return self.w.value.shape[0]

    def parameters(self) -> list[Parameter]:
        return [self.w, self.u_rz, self.u_h, self.b]

    @classmethod
    def init(cls, prefix: str, fan_in: int, units: int, rng: np.random.Generator,
             dtype=np.float32) -> "GruParams":
        return cls(
            w=Parameter.uniform(f"{prefix}.w", (fan_in, 3 * units), fan_in, rng, dtype),
            u_rz=Parameter.uniform(f"{prefix}.u_rz", (units, 2 * units), units, rng, dtype),
            u_h=Parameter.uniform(f"{prefix}.u_h", (units, units), units, rng, dtype),
            b=Parameter.zeros(f"{prefix}.b", (3 * units,), dtype),
        )

    @classmethod
    def from_gates(cls, w_r, w_z, w_h, u_r, u_z, u_h, b_r, b_z, b_h, name="gru") -> "GruParams":
        """Assemble fused parameters from per-gate matrices (test helper)."""
        w = np.concatenate([np.atleast_2d(w_r), np.atleast_2d(w_z), np.atleast_2d(w_h)], axis=1)
        u_rz = np.concatenate([np.atleast_2d(u_r), np.atleast_2d(u_z)], axis=1)
        u_hm = np.atleast_2d(u_h)
        b = np.concatenate([np.atleast_1d(b_r), np.atleast_1d(b_z), np.atleast_1d(b_h)])
        mk = lambda n, v: Parameter(n, np.asarray(v, dtype=np.float64),
                                    np.zeros(np.asarray(v).shape, dtype=np.float64))
        return cls(mk(f"{name}.w", w), mk(f"{name}.u_rz", u_rz), mk(f"{name}.u_h", u_hm),
                   mk(f"{name}.b", b))


def _gates(xw_t: np.ndarray, h_prev: np.ndarray, p: GruParams):
    """One cell step given the precomputed input contribution x @ w."""
    u = p.units
    a_rz = xw_t[:, : 2 * u] + h_prev @ p.u_rz.value + p.b.value[: 2 * u]
    rz = sigmoid(a_rz)
    r, z = rz[:, :u], rz[:, u:]
    rh = r * h_prev
    a_h = xw_t[:, 2 * u :] + rh @ p.u_h.value + p.b.value[2 * u :]
    hc = np.tanh(a_h)
    h_new = h_prev + z * (hc - h_prev)
    return r, z, hc, h_new


def gru_cell(x: np.ndarray, h_prev: np.ndarray, p: GruParams) -> np.ndarray:
    """Single GRU step; ``x`` is (B, D) and ``h_prev`` (B, U)."""
    x = np.atleast_2d(x)
    h_prev = np.atleast_2d(h_prev)
    if x.shape[1] != p.fan_in or h_prev.shape[1] != p.units:
        raise ValueError(
            f"gru_cell shape mismatch: x {x.shape}, h {h_prev.shape}, "
            f"expects fan_in {p.fan_in}, units {p.units}"
        )
    _, _, _, h_new = _gates(x @ p.w.value, h_prev, p)
    return h_new


class _ScanCache:
    __slots__ = ("xs", "xw", "mask", "r", "z", "hc", "h_prev")

    def __init__(self, xs, xw, mask, r, z, hc, h_prev):
        self.xs = xs
        self.xw = xw
        self.mask = mask
        self.r = r
        self.z = z
        self.hc = hc
        self.h_prev = h_prev


class GruDirection:
    """Scan of one GRU over time, forwards or backwards through the sequence.

    Output row t is the state after consuming input t, scanning from index
    0 (forward) or from index n-1 (reverse).
    """

    def __init__(self, params: GruParams, reverse: bool = False) -> None:
        self.params = params
        self.reverse = reverse

    @property
    def out_dim(self) -> int:
        return self.params.units

    def parameters(self) -> list[Parameter]:
        return self.params.parameters()

    def forward(self, xs: np.ndarray, mask: np.ndarray | None = None):
        p = self.params
        t_len, batch, _ = xs.shape
        u = p.units
        xw = xs.reshape(t_len * batch, -1) @ p.w.value
        xw = xw.reshape(t_len, batch, 3 * u)
        hs = np.empty((t_len, batch, u), dtype=xs.dtype)
        r_s = np.empty_like(hs)
        z_s = np.empty_like(hs)
        hc_s = np.empty_like(hs)
        hp_s = np.empty_like(hs)
        h = np.zeros((batch, u), dtype=xs.dtype)
        order = range(t_len - 1, -1, -1) if self.reverse else range(t_len)
        for t in order:
            hp_s[t] = h
            r, z, hc, h_new = _gates(xw[t], h, p)
            r_s[t], z_s[t], hc_s[t] = r, z, hc
            if mask is not None:
                h = h + mask[t] * (h_new - h)
            else:
                h = h_new
            hs[t] = h
        check_finite(hs, "gru scan output")
        return hs, _ScanCache(xs, xw, mask, r_s, z_s, hc_s, hp_s)

    def backward(self, cache: _ScanCache, dhs: np.ndarray) -> np.ndarray:
        p = self.params
        t_len, batch, u = dhs.shape
        da_all = np.empty((t_len, batch, 3 * u), dtype=dhs.dtype)
        u_rz_t = p.u_rz.value.T
        u_h_t = p.u_h.value.T
        dh = np.zeros((batch, u), dtype=dhs.dtype)
        order = range(t_len) if self.reverse else range(t_len - 1, -1, -1)
        for t in order:
            dh = dh + dhs[t]
            r, z, hc, h_prev = cache.r[t], cache.z[t], cache.hc[t], cache.h_prev[t]
            if cache.mask is not None:
                m = cache.mask[t]
                dh_new = dh * m
                dh = dh * (1.0 - m)  # pass-through part becomes the carry
            else:
                dh_new = dh
                dh = np.zeros_like(dh)
            dz = dh_new * (hc - h_prev)
            dhc = dh_new * z
            dh += dh_new * (1.0 - z)
            da_h = dhc * (1.0 - hc * hc)
            drh = da_h @ u_h_t
            dh += drh * r
            dr = drh * h_prev
            da_r = dr * r * (1.0 - r)
            da_z = dz * z * (1.0 - z)
            da_all[t, :, :u] = da_r
            da_all[t, :, u : 2 * u] = da_z
            da_all[t, :, 2 * u :] = da_h
            dh += da_all[t, :, : 2 * u] @ u_rz_t
        flat_da = da_all.reshape(t_len * batch, 3 * u)
        flat_hp = cache.h_prev.reshape(t_len * batch, u)
        rh = (cache.r * cache.h_prev).reshape(t_len * batch, u)
        p.w.grad += cache.xs.reshape(t_len * batch, -1).T @ flat_da
        p.b.grad += flat_da.sum(axis=0)
        p.u_rz.grad += flat_hp.T @ flat_da[:, : 2 * u]
        p.u_h.grad += rh.T @ flat_da[:, 2 * u :]
        dxs = flat_da @ p.w.value.T
        return dxs.reshape(cache.xs.shape)


class BiGru:
    """Bidirectional layer: forward and reverse scans, outputs concatenated."""

    def __init__(self, fwd: GruParams, bwd: GruParams) -> None:
        if fwd.units != bwd.units or fwd.fan_in != bwd.fan_in:
            raise ValueError("forward/backward halves must have matching shapes")
        self.fwd = GruDirection(fwd, reverse=False)
        self.bwd = GruDirection(bwd, reverse=True)

    @property
    def out_dim(self) -> int:
        return 2 * self.fwd.params.units

    def parameters(self) -> list[Parameter]:
        return self.fwd.params.parameters() + self.bwd.params.parameters()

    @classmethod
    def init(cls, prefix: str, fan_in: int, units: int, rng: np.random.Generator,
             dtype=np.float32) -> "BiGru":
        return cls(GruParams.init(f"{prefix}.fw", fan_in, units, rng, dtype),
                   GruParams.init(f"{prefix}.bw", fan_in, units, rng, dtype))

    def forward(self, xs: np.ndarray, mask: np.ndarray | None = None):
        hf, cf = self.fwd.forward(xs, mask)
        hb, cb = self.bwd.forward(xs, mask)
        return np.concatenate([hf, hb], axis=-1), (cf, cb)

    def backward(self, cache, dout: np.ndarray) -> np.ndarray:
        cf, cb = cache
        u = self.fwd.params.units
        dxs = self.fwd.backward(cf, dout[:, :, :u])
        dxs += self.bwd.backward(cb, dout[:, :, u:])
        return dxs


def bidirectional_scan(fwd: GruParams, bwd: GruParams, inputs: np.ndarray) -> np.ndarray:
    """Run one bi-directional pass over a single unbatched sequence (n, D).

    Row i of the (n, 2U) result is concat(forward state after step i,
    backward state after step n-1-i); both scans start from zero state.
    """
    if inputs.ndim != 2 or inputs.shape[0] < 1:
        raise ValueError(f"need a (n, D) sequence with n >= 1, got {inputs.shape}")
    layer = BiGru(fwd, bwd)
    out, _ = layer.forward(inputs[:, None, :])
    return out[:, 0, :]
