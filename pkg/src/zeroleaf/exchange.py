"""ZSEB embedding exchange files: the bit-exact boundary between encoders
and the classification engine.

Binary layout (fixed little-endian regardless of host):

    offset  size  field
    0       4     magic, ASCII "ZSEB"
    4       2     version, u16 LE (currently 1)
    6       4     dim, u32 LE
    10      8     count, u64 LE
    18      1     flags, bit 0 = rows pre-normalized
    19      4*count*dim   payload, float32 LE, row-major

File length must equal 19 + 4*count*dim exactly. A human-readable JSON
sidecar at "<path>.json" carries per-row descriptors, encoder provenance
and the SHA-256 hex digest of the payload bytes.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import (
    BadMagic,
    DigestMismatch,
    IoFailure,
    NonFiniteValue,
    NotNormalized,
    ParseError,
    RowCountMismatch,
    TrailingBytes,
    TruncatedPayload,
    UnsupportedVersion,
)
from .ioutil import atomic_write_bytes, atomic_write_text, read_bytes, read_text
from .vecspace import NORMALIZED_ATOL, EmbeddingMatrix

MAGIC = b"ZSEB"
VERSION = 1
_HEADER = struct.Struct("<4sHIQB")  # magic, version, dim, count, flags
HEADER_SIZE = _HEADER.size  # 19
FLAG_NORMALIZED = 0x01

KIND_TEXT_BANK = "text_bank"
KIND_IMAGE_SET = "image_set"

# Rows sampled for the normalized-flag spot check on non-strict reads.
_SAMPLE_ROWS = 16


@dataclass(frozen=True)
class TextRowInfo:
    """Descriptor for one text-bank payload row."""

    class_id: int
    class_name: str
    description_index: int
    description_text: str


@dataclass(frozen=True)
class ImageRowInfo:
    """Descriptor for one image-set payload row."""

    item_id: str
    source: str
    true_label: int | None = None


RowInfo = Union[TextRowInfo, ImageRowInfo]


@dataclass(frozen=True)
class Sidecar:
    """Ordered row descriptors plus provenance; row k describes payload row k."""

    kind: str
    provenance: str
    rows: tuple[RowInfo, ...]
    payload_sha256: str = ""

    def __post_init__(self):
        if self.kind not in (KIND_TEXT_BANK, KIND_IMAGE_SET):
            raise ParseError(f"unknown sidecar kind {self.kind!r}")
        want = TextRowInfo if self.kind == KIND_TEXT_BANK else ImageRowInfo
        for i, row in enumerate(self.rows):
            if not isinstance(row, want):
                raise ParseError(f"sidecar row {i} is not a {want.__name__}")
        object.__setattr__(self, "rows", tuple(self.rows))


def _sidecar_to_json(sidecar: Sidecar) -> str:
    rows = []
    for r in sidecar.rows:
        if isinstance(r, TextRowInfo):
            rows.append({
                "class_id": r.class_id,
                "class_name": r.class_name,
                "description_index": r.description_index,
                "description_text": r.description_text,
            })
        else:
            rows.append({
                "item_id": r.item_id,
                "source": r.source,
                "true_label": r.true_label,
            })
    doc = {
        "format": "zseb-sidecar",
        "version": VERSION,
        "kind": sidecar.kind,
        "provenance": sidecar.provenance,
        "payload_sha256": sidecar.payload_sha256,
        "rows": rows,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _sidecar_from_json(text: str, path: str) -> Sidecar:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"sidecar {path}: invalid JSON: {exc}") from exc
    try:
        kind = doc["kind"]
        raw_rows = doc["rows"]
        rows: list[RowInfo] = []
        for r in raw_rows:
            if kind == KIND_TEXT_BANK:
                rows.append(TextRowInfo(
                    class_id=int(r["class_id"]),
                    class_name=str(r["class_name"]),
                    description_index=int(r["description_index"]),
                    description_text=str(r["description_text"]),
                ))
            else:
                label = r["true_label"]
                rows.append(ImageRowInfo(
                    item_id=str(r["item_id"]),
                    source=str(r["source"]),
                    true_label=None if label is None else int(label),
                ))
        return Sidecar(
            kind=kind,
            provenance=str(doc["provenance"]),
            rows=tuple(rows),
            payload_sha256=str(doc["payload_sha256"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"sidecar {path}: {exc!r}") from exc


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".json")


def write_embedding_file(matrix: EmbeddingMatrix, sidecar: Sidecar, path: str | Path) -> None:
    """Write matrix payload plus sidecar; re-reading yields identical bytes."""
    if not np.all(np.isfinite(matrix.data)):
        raise NonFiniteValue("payload contains NaN/Inf")
    if len(sidecar.rows) != matrix.rows:
        raise RowCountMismatch(
            f"sidecar describes {len(sidecar.rows)} rows, matrix has {matrix.rows}"
        )
    payload = np.ascontiguousarray(matrix.data, dtype="<f4").tobytes()
    digest = hashlib.sha256(payload).hexdigest()
    flags = FLAG_NORMALIZED if matrix.normalized else 0
    header = _HEADER.pack(MAGIC, VERSION, matrix.dim, matrix.rows, flags)
    atomic_write_bytes(path, header + payload)
    stamped = Sidecar(
        kind=sidecar.kind,
        provenance=sidecar.provenance,
        rows=sidecar.rows,
        payload_sha256=digest,
    )
    atomic_write_text(sidecar_path(path), _sidecar_to_json(stamped))


def read_header(path: str | Path) -> tuple[int, int, int, int]:
    """Parse just the 19-byte header; returns (version, dim, count, flags)."""
    try:
        with open(path, "rb") as fh:
            buf = fh.read(HEADER_SIZE)
    except OSError as exc:
        raise IoFailure(f"reading {path}: {exc}") from exc
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise BadMagic(f"{path}: not a ZSEB file")
    if len(buf) < HEADER_SIZE:
        raise TruncatedPayload(f"{path}: header truncated at {len(buf)} bytes")
    _, version, dim, count, flags = _HEADER.unpack(buf)
    if version != VERSION:
        raise UnsupportedVersion(f"{path}: version {version}, reader supports {VERSION}")
    return version, dim, count, flags


def read_embedding_file(path: str | Path, strict: bool = False) -> tuple[EmbeddingMatrix, Sidecar]:
    """Read and validate a ZSEB file plus its sidecar.

    The pre-normalized flag is trusted only after re-verifying row norms: a
    deterministic sample by default, every row when strict=True.
    """
    buf = read_bytes(path)
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise BadMagic(f"{path}: not a ZSEB file")
    if len(buf) < HEADER_SIZE:
        raise TruncatedPayload(f"{path}: header truncated at {len(buf)} bytes")
    _, version, dim, count, flags = _HEADER.unpack(buf[:HEADER_SIZE])
    if version != VERSION:
        raise UnsupportedVersion(f"{path}: version {version}, reader supports {VERSION}")
    expected = HEADER_SIZE + 4 * count * dim
    if len(buf) < expected:
        raise TruncatedPayload(
            f"{path}: {len(buf)} bytes, header implies {expected}"
        )
    if len(buf) > expected:
        raise TrailingBytes(f"{path}: {len(buf) - expected} bytes past the payload")
    payload = buf[HEADER_SIZE:]

    sc_text = read_text(sidecar_path(path))
    sidecar = _sidecar_from_json(sc_text, str(sidecar_path(path)))
    digest = hashlib.sha256(payload).hexdigest()
    if digest != sidecar.payload_sha256:
        raise DigestMismatch(
            f"{path}: payload sha256 {digest} != sidecar {sidecar.payload_sha256}"
        )
    if len(sidecar.rows) != count:
        raise RowCountMismatch(
            f"{path}: sidecar describes {len(sidecar.rows)} rows, header says {count}"
        )

    arr = np.frombuffer(payload, dtype="<f4").reshape(count, dim).astype(np.float32)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{path}: payload contains NaN/Inf")

    pre_normalized = bool(flags & FLAG_NORMALIZED)
    if pre_normalized and count > 0:
        if strict or count <= _SAMPLE_ROWS:
            sample = range(count)
        else:
            step = count / _SAMPLE_ROWS
            sample = sorted({int(i * step) for i in range(_SAMPLE_ROWS)})
        for i in sample:
            norm = float(np.linalg.norm(np.asarray(arr[i], dtype=np.float64)))
            if abs(norm - 1.0) > NORMALIZED_ATOL:
                raise NotNormalized(f"{path}: row {i} flagged unit-norm but has norm {norm!r}")

    matrix = EmbeddingMatrix(arr, normalized=pre_normalized)
    return matrix, sidecar


def image_sidecar(ids: Sequence[str], sources: Sequence[str],
                  labels: Sequence[int | None], provenance: str) -> Sidecar:
    """Convenience constructor for image-set sidecars."""
    if not (len(ids) == len(sources) == len(labels)):
        raise RowCountMismatch("ids, sources and labels must align")
    rows = tuple(
        ImageRowInfo(item_id=i, source=s, true_label=l)
        for i, s, l in zip(ids, sources, labels)
    )
    return Sidecar(kind=KIND_IMAGE_SET, provenance=provenance, rows=rows)
