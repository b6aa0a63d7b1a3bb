"""Deterministic stub encoder: a hermetic test double for the text and image
encoders.

Byte-level derivation, reproducible across platforms (so consumers can
regenerate expected vectors with any SHA-256 implementation):

    block_k   = SHA256( UTF8( "<seed>|<input_id>|<k>" ) )      k = 0, 1, ...
    stream    = block_0 || block_1 || ...                       (32 bytes each)
    raw_i     = little-endian uint32 at stream[4*i : 4*i + 4]   i = 0 .. dim-1
    u_i       = raw_i / 2**32                                   in [0, 1)
    x_i       = (2*u_i - 1) * sqrt(3 / dim)

The sqrt(3/dim) scale gives E[x_i^2] = 1/dim, so vectors land near the unit
sphere without being exactly unit (downstream normalization stays meaningful).
Components are computed in 64-bit and stored as 32-bit floats.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np


def stub_encode(input_id: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic pseudo-random vector for one input id; float32, shape (dim,)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    needed = 4 * dim
    blocks = []
    k = 0
    while 32 * len(blocks) < needed:
        blocks.append(hashlib.sha256(f"{seed}|{input_id}|{k}".encode("utf-8")).digest())
        k += 1
    stream = b"".join(blocks)
    scale = math.sqrt(3.0 / dim)
    out = np.empty(dim, dtype=np.float64)
    for i in range(dim):
        raw = int.from_bytes(stream[4 * i:4 * i + 4], "little")
        out[i] = (2.0 * (raw / 2.0 ** 32) - 1.0) * scale
    return out.astype(np.float32)
