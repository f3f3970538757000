"""Small shared helpers."""

from __future__ import annotations

import hashlib

import numpy as np


def hash_arrays(*arrays: np.ndarray) -> str:
    """Stable hex digest of the byte content of several arrays."""
    digest = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        digest.update(str(a.dtype).encode())
        digest.update(str(a.shape).encode())
        digest.update(a.tobytes())
    return digest.hexdigest()
