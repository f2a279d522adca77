"""Versioned JSON parameter serialization.

Values are stored as shortest-round-trip decimal strings (Python repr), so a
save/load cycle reproduces every float64 bit-exactly.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .autograd import Tensor

FORMAT_VERSION = 1


def params_to_dict(params: list[Tensor]) -> dict:
    shapes = [list(p.data.shape) for p in params]
    flat_values: list[str] = []
    for p in params:
        flat_values.extend(repr(float(v)) for v in p.data.reshape(-1))
    return {"format_version": FORMAT_VERSION, "shapes": shapes, "flat_values": flat_values}


def arrays_from_dict(d: dict) -> list[np.ndarray]:
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format_version {d.get('format_version')!r}")
    values = [float(s) for s in d["flat_values"]]
    arrays = []
    offset = 0
    for shape in d["shapes"]:
        n = int(np.prod(shape)) if shape else 1
        chunk = np.array(values[offset : offset + n], dtype=np.float64).reshape(shape)
        arrays.append(chunk)
        offset += n
    if offset != len(values):
        raise ValueError("flat_values length does not match shapes")
    return arrays


def load_params_dict(params: list[Tensor], d: dict) -> None:
    arrays = arrays_from_dict(d)
    if len(arrays) != len(params):
        raise ValueError("parameter count mismatch")
    for p, a in zip(params, arrays):
        if a.shape != p.data.shape:
            raise ValueError(f"shape mismatch: {a.shape} vs {p.data.shape}")
        p.data = a


def params_hash(params: list[Tensor]) -> str:
    """Stable content hash of the parameter values."""
    d = params_to_dict(params)
    payload = json.dumps({"shapes": d["shapes"], "flat_values": d["flat_values"]}, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
