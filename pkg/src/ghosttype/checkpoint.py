"""Binary model checkpoints.

Layout: one JSON header line (format_version, config, rng_seed, epoch,
metrics) terminated by ``\\n``, then one record per tensor in parameter
order:

    uint16 name_len | name utf-8 | uint8 ndim | uint32 * ndim dims | float32 values

All integers and floats are little-endian; values are C-order.  Loading
rebuilds the model from the stored config and validates every tensor
name and shape against it.
"""

from __future__ import annotations

import json
import struct
from os import PathLike

import numpy as np

from .model import ModelConfig, NeuralDecoder, config_from_dict, config_to_dict

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(model: NeuralDecoder, path: str | PathLike, epoch: int = 0,
                    metrics: dict | None = None) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "config": config_to_dict(model.config),
        "rng_seed": model.seed,
        "epoch": int(epoch),
        "metrics": metrics or {},
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        f.write(b"\n")
        for p in model.parameters():
            name = p.name.encode("utf-8")
            f.write(struct.pack("<H", len(name)))
            f.write(name)
            f.write(struct.pack("<B", p.value.ndim))
            f.write(struct.pack(f"<{p.value.ndim}I", *p.value.shape))
            f.write(np.ascontiguousarray(p.value, dtype="<f4").tobytes())


def _read_exact(f, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise CheckpointError(f"truncated checkpoint while reading {what}")
    return buf


def read_header(path: str | PathLike) -> dict:
    with open(path, "rb") as f:
        line = f.readline()
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"bad checkpoint header: {e}") from e
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported format_version {header.get('format_version')!r}")
    return header


def load_checkpoint(path: str | PathLike) -> tuple[NeuralDecoder, dict]:
    with open(path, "rb") as f:
        line = f.readline()
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CheckpointError(f"bad checkpoint header: {e}") from e
        if header.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(f"unsupported format_version {header.get('format_version')!r}")
        try:
            config = config_from_dict(header["config"])
        except (KeyError, TypeError, ValueError) as e:
            raise CheckpointError(f"bad config in checkpoint: {e}") from e
        model = NeuralDecoder(config, seed=int(header.get("rng_seed", 0)))

        tensors: dict[str, np.ndarray] = {}
        while True:
            head = f.read(2)
            if not head:
                break
            if len(head) != 2:
                raise CheckpointError("truncated checkpoint while reading name length")
            (name_len,) = struct.unpack("<H", head)
            name = _read_exact(f, name_len, "tensor name").decode("utf-8")
            (ndim,) = struct.unpack("<B", _read_exact(f, 1, f"{name} ndim"))
            shape = struct.unpack(f"<{ndim}I", _read_exact(f, 4 * ndim, f"{name} dims"))
            count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
            raw = _read_exact(f, 4 * count, f"{name} values")
            tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(shape)

    for p in model.parameters():
        if p.name not in tensors:
            raise CheckpointError(f"checkpoint is missing tensor {p.name!r}")
        arr = tensors.pop(p.name)
        if arr.shape != p.value.shape:
            raise CheckpointError(
                f"tensor {p.name!r} has shape {arr.shape}, config implies {p.value.shape}")
        p.value[...] = arr.astype(model.dtype)
    if tensors:
        extra = ", ".join(sorted(tensors))
        raise CheckpointError(f"checkpoint has unexpected tensors: {extra}")
    return model, header


def same_weights(a: NeuralDecoder, b: NeuralDecoder) -> bool:
    pa, pb = a.parameters(), b.parameters()
    if [p.name for p in pa] != [p.name for p in pb]:
        return False
    return all(np.array_equal(x.value, y.value) for x, y in zip(pa, pb))


def build_model(config: ModelConfig, seed: int = 0, dtype=np.float32) -> NeuralDecoder:
    return NeuralDecoder(config, seed=seed, dtype=dtype)
