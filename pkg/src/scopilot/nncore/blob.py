"""Single-file tensor container.

Layout: 8-byte little-endian unsigned header length, UTF-8 JSON header, then
a raw blob of little-endian float32 values, row-major. The header carries a
version string, a manifest of (name, shape, offset) entries with offsets in
bytes relative to the blob start, and an arbitrary JSON `meta` object for
whatever the caller needs alongside the tensors (model config, vocabulary,
optimizer scalars).
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from ..errors import ValidationError

_LEN = struct.Struct("<Q")


def write_container(path, version: str, arrays: dict, meta: dict | None = None) -> None:
    """Write tensors + metadata atomically (tmp file, fsync, rename)."""
    manifest = []
    chunks = []
    offset = 0
    for name in arrays:
        arr = np.ascontiguousarray(arrays[name], dtype="<f4")
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        chunks.append(arr.tobytes())
        offset += len(chunks[-1])
    header = json.dumps(
        {"version": version, "meta": meta or {}, "manifest": manifest},
        ensure_ascii=False,
    ).encode("utf-8")

    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(_LEN.pack(len(header)))
        f.write(header)
        for c in chunks:
            f.write(c)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def read_container(path, expect_version: str | None = None) -> tuple[dict, dict]:
    """Read back (meta, {name: float32 array}).

    With expect_version set, any other version string is rejected rather than
    guessed at.
    """
    with open(path, "rb") as f:
        raw_len = f.read(_LEN.size)
        if len(raw_len) != _LEN.size:
            raise ValidationError(f"truncated container: {path}")
        (hlen,) = _LEN.unpack(raw_len)
        raw_header = f.read(hlen)
        if len(raw_header) != hlen:
            raise ValidationError(f"truncated container header: {path}")
        try:
            header = json.loads(raw_header.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"corrupt container header: {exc}") from exc
        blob = f.read()

    version = header.get("version")
    if expect_version is not None and version != expect_version:
        raise ValidationError(f"unsupported container version {version!r}, expected {expect_version!r}")

    arrays = {}
    for entry in header.get("manifest", []):
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        end = start + 4 * count
        if end > len(blob):
            raise ValidationError(f"container blob truncated for tensor {entry['name']!r}")
        arr = np.frombuffer(blob[start:end], dtype="<f4").reshape(shape)
        arrays[entry["name"]] = arr.astype(np.float32)
    return header.get("meta", {}), arrays
