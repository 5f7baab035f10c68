"""Checkpoint files: a JSON header followed by raw little-endian float64 tensors.

Layout: the 8 magic bytes, the header length as an 8-byte little-endian
unsigned int, the UTF-8 JSON header, then every tensor listed in the header
in order, flattened row-major.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from ..tokenizer import Tokenizer
from .config import ModelConfig
from .transformer import Seq2Seq

MAGIC = b"MJREPR01"


class BadCheckpoint(ValueError):
    pass


def save(path, model: Seq2Seq, tok: Tokenizer, extra: dict | None = None) -> None:
    state = model.state_dict()
    header = {
        "config": model.cfg.to_json(),
        "tensors": [{"name": k, "shape": list(v.shape)} for k, v in state.items()],
        "merges": [list(m) for m in tok.merges],
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for v in state.values():
            f.write(v.detach().numpy().astype("<f8").tobytes(order="C"))


def load(path) -> tuple[Seq2Seq, Tokenizer, dict]:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise BadCheckpoint(f"{path}: not a checkpoint")
    (n,) = struct.unpack("<Q", data[8:16])
    header = json.loads(data[16:16 + n])
    model = Seq2Seq(ModelConfig.from_json(header["config"]))
    offset = 16 + n
    state = {}
    for t in header["tensors"]:
        count = int(np.prod(t["shape"])) if t["shape"] else 1
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(t["shape"])
        state[t["name"]] = torch.from_numpy(arr.astype(np.float64))
        offset += 8 * count
    if offset != len(data):
        raise BadCheckpoint(f"{path}: {len(data) - offset} trailing bytes")
    model.load_state_dict(state)
    model.eval()
    return model, Tokenizer([tuple(m) for m in header["merges"]]), header["extra"]
