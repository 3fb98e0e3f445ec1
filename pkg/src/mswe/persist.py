"""Versioned tensor archive used for model and classifier checkpoints.

Layout: a magic line, one JSON header line, then the raw little-endian bytes of
every tensor in header order. The header carries a SHA-256 of the payload so a
truncated or edited file is rejected before any state is built. Output bytes
depend only on the content (no timestamps), so identical runs give identical
files.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

MAGIC = b"MSWE-ARCHIVE\n"
VERSION = 1


class CheckpointError(ValueError):
    pass


def write_archive(path, kind: str, meta: dict, tensors: dict[str, np.ndarray]) -> None:
    entries = []
    chunks = []
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr)
        dt = arr.dtype.newbyteorder("<")
        entries.append({"name": name, "shape": list(arr.shape), "dtype": dt.str})
        chunks.append(arr.astype(dt, copy=False).tobytes())
    payload = b"".join(chunks)
    header = {
        "version": VERSION,
        "kind": kind,
        "meta": meta,
        "tensors": entries,
        "sha256": hashlib.sha256(payload).hexdigest(),
    }
    blob = MAGIC + json.dumps(header, sort_keys=True).encode("utf-8") + b"\n" + payload
    Path(path).write_bytes(blob)


def read_archive(path, kind: str | None = None):
    """Return ``(meta, tensors)``; raise CheckpointError on any inconsistency."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if not blob.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a checkpoint file")
    nl = blob.find(b"\n", len(MAGIC))
    if nl < 0:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(blob[len(MAGIC):nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: corrupt header ({e})") from e
    if header.get("version") != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {header.get('version')!r}")
    if kind is not None and header.get("kind") != kind:
        raise CheckpointError(f"{path}: expected a {kind!r} checkpoint, found {header.get('kind')!r}")
    payload = blob[nl + 1:]
    if hashlib.sha256(payload).hexdigest() != header.get("sha256"):
        raise CheckpointError(f"{path}: payload checksum mismatch")
    tensors = {}
    offset = 0
    for ent in header["tensors"]:
        dt = np.dtype(ent["dtype"])
        shape = tuple(ent["shape"])
        nbytes = dt.itemsize * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(payload):
            raise CheckpointError(f"{path}: payload too short for tensor {ent['name']}")
        arr = np.frombuffer(payload, dtype=dt, count=nbytes // dt.itemsize, offset=offset)
        tensors[ent["name"]] = arr.reshape(shape).astype(dt.newbyteorder("="))
        offset += nbytes
    if offset != len(payload):
        raise CheckpointError(f"{path}: trailing bytes after last tensor")
    return header["meta"], tensors
