"""Writer for the ZSEB embedding exchange format (little-endian, versioned).

Layout: "ZSEB" magic, u16 version (1), u32 dim, u64 count, 1 flag byte
(bit 0 = rows pre-normalized), then count*dim float32 row-major payload.
A JSON sidecar at "<path>.json" carries ordered row descriptors, encoder
provenance and the SHA-256 hex digest of the payload bytes.

This is an independent implementation of the documented exchange layout;
the core package owns the reader side.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"ZSEB"
VERSION = 1
_HEADER = struct.Struct("<4sHIQB")
FLAG_NORMALIZED = 0x01

KIND_TEXT_BANK = "text_bank"
KIND_IMAGE_SET = "image_set"


def _atomic_write(path: str | Path, data: bytes) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def text_row(class_id: int, class_name: str, description_index: int,
             description_text: str) -> dict:
    return {
        "class_id": class_id,
        "class_name": class_name,
        "description_index": description_index,
        "description_text": description_text,
    }


def image_row(item_id: str, source: str, true_label: int | None) -> dict:
    return {"item_id": item_id, "source": source, "true_label": true_label}


def write_zseb(rows: np.ndarray, kind: str, row_descriptors: Sequence[dict],
               provenance: str, path: str | Path, normalized: bool = False) -> None:
    """Write payload plus sidecar; deterministic bytes for identical inputs."""
    arr = np.ascontiguousarray(rows, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError(f"rows must be 2-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("payload must be finite")
    count, dim = arr.shape
    if len(row_descriptors) != count:
        raise ValueError(f"{len(row_descriptors)} descriptors for {count} rows")
    payload = arr.tobytes()
    flags = FLAG_NORMALIZED if normalized else 0
    header = _HEADER.pack(MAGIC, VERSION, dim, count, flags)
    _atomic_write(path, header + payload)

    sidecar = {
        "format": "zseb-sidecar",
        "version": VERSION,
        "kind": kind,
        "provenance": provenance,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
        "rows": list(row_descriptors),
    }
    _atomic_write(
        Path(str(path) + ".json"),
        (json.dumps(sidecar, indent=2, sort_keys=True) + "\n").encode("utf-8"),
    )
