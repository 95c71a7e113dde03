"""Versioned binary checkpoint container.

Layout: 8-byte magic, uint32 version, uint32 header length, UTF-8 JSON
header (architecture config plus a tensor manifest), then the raw
little-endian tensor payloads in manifest order. Weights are float32 and
round-trip bit-exactly; schedule betas ride along as a float64 tensor.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from ..errors import CheckpointError
from .model import DenoiserConfig, DenoiserParams, GradingDenoiser
from .schedule import NoiseSchedule

_MAGIC = b"GFLDCKPT"
_VERSION = 1
_SCHEDULE_TENSOR = "schedule.betas"


def save_checkpoint(path: str | Path, params: DenoiserParams, sched: NoiseSchedule) -> None:
    tensors: list[tuple[str, np.ndarray]] = [
        (_SCHEDULE_TENSOR, sched.betas.astype("<f8")),
    ]
    for name, value in params.model.state_dict().items():
        tensors.append((f"weights.{name}", value.numpy().astype("<f4")))

    manifest = [
        {"name": name, "shape": list(arr.shape), "dtype": arr.dtype.str}
        for name, arr in tensors
    ]
    header = json.dumps(
        {"denoiser": params.config.to_dict(), "tensors": manifest}
    ).encode("utf-8")

    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_suffix(out.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(header)))
        fh.write(header)
        for _, arr in tensors:
            fh.write(np.ascontiguousarray(arr).tobytes())
    tmp.replace(out)


def load_checkpoint(path: str | Path) -> tuple[DenoiserParams, NoiseSchedule]:
    src = Path(path)
    if not src.exists():
        raise CheckpointError(f"checkpoint not found: {src}")
    data = src.read_bytes()
    if len(data) < 16 or data[:8] != _MAGIC:
        raise CheckpointError(f"not a gradeforge checkpoint: {src}")
    version, header_len = struct.unpack("<II", data[8:16])
    if version != _VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    try:
        header = json.loads(data[16 : 16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from exc

    offset = 16 + header_len
    arrays: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        dtype = np.dtype(entry["dtype"])
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        nbytes = count * dtype.itemsize
        if offset + nbytes > len(data):
            raise CheckpointError(f"checkpoint payload truncated at {entry['name']}")
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        arrays[entry["name"]] = arr.reshape(entry["shape"]).copy()
        offset += nbytes
    if offset != len(data):
        raise CheckpointError("checkpoint has trailing bytes")
    if _SCHEDULE_TENSOR not in arrays:
        raise CheckpointError("checkpoint missing schedule betas")

    sched = NoiseSchedule(arrays.pop(_SCHEDULE_TENSOR).astype(np.float64))
    config = DenoiserConfig.from_dict(header["denoiser"])
    model = GradingDenoiser(config)
    state = {}
    for name, arr in arrays.items():
        if not name.startswith("weights."):
            raise CheckpointError(f"unknown tensor {name!r}")
        state[name[len("weights."):]] = torch.from_numpy(arr.astype(np.float32))
    model.load_state_dict(state)
    model.eval()
    return DenoiserParams(config=config, model=model), sched
