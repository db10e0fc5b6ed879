"""Binary checkpoint container.

Layout (all integers little-endian)::

    b"CGNNCKPT"  u32 version  u32 header_len  header (UTF-8 JSON)
    u32 entry_count
    entry*: u16 name_len  name  u8 ndim  u64[ndim] shape  f64[prod(shape)] payload

The header carries the training config, the epoch counter and the Adam step.
Entries are the parameters under their hierarchical names, plus the Adam
moments as ``adam/m/<name>`` and ``adam/v/<name>``.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .training import Model, TrainConfig

MAGIC = b"CGNNCKPT"
VERSION = 1


def _entries(model: Model):
    store = model.store
    for name, p in store.params.items():
        yield name, p.data
    for name in store.params:
        yield f"adam/m/{name}", store.m[name]
    for name in store.params:
        yield f"adam/v/{name}", store.v[name]


def checkpoint_bytes(model: Model) -> bytes:
    header = json.dumps(
        {"config": model.config.to_json(), "epochs_done": model.epochs_done, "step": model.store.step},
        sort_keys=True,
    ).encode()
    out = [MAGIC, struct.pack("<II", VERSION, len(header)), header]
    entries = list(_entries(model))
    out.append(struct.pack("<I", len(entries)))
    for name, arr in entries:
        raw = name.encode()
        arr = np.ascontiguousarray(arr, dtype="<f8")
        out.append(struct.pack("<H", len(raw)) + raw)
        out.append(struct.pack("<B", arr.ndim) + struct.pack(f"<{arr.ndim}Q", *arr.shape))
        out.append(arr.tobytes())
    return b"".join(out)


def checkpoint_save(model: Model, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(model))
    return path


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise CheckpointError("checkpoint file is truncated")
        chunk = self.buf[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def checkpoint_load(path) -> Model:
    path = Path(path)
    try:
        buf = path.read_bytes()
    except FileNotFoundError:
        raise CheckpointError(f"no checkpoint at {path}") from None
    r = _Reader(buf)
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    version, header_len = r.unpack("<II")
    if version != VERSION:
        raise CheckpointError(f"checkpoint version {version} unsupported (expected {VERSION})")
    try:
        header = json.loads(r.take(header_len).decode())
        config = TrainConfig.from_json(header["config"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from None

    (count,) = r.unpack("<I")
    arrays = {}
    for _ in range(count):
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode()
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}Q") if ndim else ()
        size = int(np.prod(shape)) if ndim else 1
        arrays[name] = np.frombuffer(r.take(8 * size), dtype="<f8").reshape(shape).astype(np.float64)
    if r.pos != len(buf):
        raise CheckpointError("trailing bytes after last checkpoint entry")

    model = Model.initialize(config)
    store = model.store
    for name, p in store.params.items():
        for key in (name, f"adam/m/{name}", f"adam/v/{name}"):
            if key not in arrays:
                raise CheckpointError(f"checkpoint is missing entry {key!r}")
            if arrays[key].shape != p.data.shape:
                raise CheckpointError(f"entry {key!r} has shape {arrays[key].shape}, expected {p.data.shape}")
        p.data = arrays[name]
        store.m[name] = arrays[f"adam/m/{name}"]
        store.v[name] = arrays[f"adam/v/{name}"]
    extra = set(arrays) - {k for n in store.params for k in (n, f"adam/m/{n}", f"adam/v/{n}")}
    if extra:
        raise CheckpointError(f"unexpected checkpoint entries: {sorted(extra)[:3]}")
    store.step = int(header["step"])
    model.epochs_done = int(header["epochs_done"])
    return model
