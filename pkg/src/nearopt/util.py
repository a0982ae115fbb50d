"""Small shared helpers: canonical JSON, hashing, worker counts."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Any

import numpy as np

__all__ = [
    "jsonable",
    "canonical_json",
    "write_canonical_json",
    "sha256_bytes",
    "sha256_file",
    "worker_count",
]


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays so json.dumps accepts them."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(obj: Any) -> str:
    """Stable JSON text: sorted keys, fixed separators, trailing newline.

    Floats go through repr (shortest round-trip), so equal inputs yield
    byte-identical output across runs.  NaN/inf are rejected.
    """
    return (
        json.dumps(jsonable(obj), sort_keys=True, indent=1, allow_nan=False)
        + "\n"
    )


def write_canonical_json(obj: Any, path: str | Path) -> str:
    text = canonical_json(obj)
    Path(path).write_text(text)
    return text


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def worker_count(limit: int | None = None) -> int:
    """Parallel worker budget: NEAROPT_THREADS if set, else CPU count.

    Workers only split embarrassingly parallel verification work; output
    bytes never depend on this number.
    """
    env = os.environ.get("NEAROPT_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            n = 1
        n = max(1, n)
    else:
        n = os.cpu_count() or 1
    if limit is not None:
        n = min(n, limit)
    return n
