"""Manifest + blob array persistence.

A human-readable JSON manifest describes named float64 arrays stored
row-major, little-endian, in a companion binary blob. Round trips are
bitwise lossless; the manifest carries a checksum so truncation or
corruption is detected on load. Writes are atomic (temp file + rename).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np

from .errors import CorruptionError, FormatVersionError

FORMAT_VERSION = 1


def _atomic_write(path: str, data: bytes):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def blob_path(manifest_path: str) -> str:
    root, _ = os.path.splitext(manifest_path)
    return root + ".bin"


def save_arrays(manifest_path: str, arrays: dict, meta: dict | None = None):
    """Persist named arrays as f64le blob + JSON manifest."""
    records = []
    chunks = []
    offset = 0
    for name, arr in arrays.items():
        a = np.ascontiguousarray(np.asarray(arr, dtype="<f8"))
        raw = a.tobytes()
        records.append({
            "name": name,
            "shape": list(a.shape),
            "dtype": "f64le",
            "offset": offset,
            "length": len(raw),
        })
        chunks.append(raw)
        offset += len(raw)
    blob = b"".join(chunks)
    manifest = {
        "format_version": FORMAT_VERSION,
        "meta": meta or {},
        "arrays": records,
        "blob_size": len(blob),
        "sha256": hashlib.sha256(blob).hexdigest(),
    }
    _atomic_write(blob_path(manifest_path), blob)
    _atomic_write(manifest_path,
                  json.dumps(manifest, indent=1, sort_keys=True).encode())


def load_arrays(manifest_path: str):
    """Load (arrays, meta); raises CorruptionError on any inconsistency."""
    with open(manifest_path, "rb") as fh:
        manifest = json.loads(fh.read())
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionError(
            f"manifest written with format_version {version}, "
            f"this build reads {FORMAT_VERSION}"
        )
    with open(blob_path(manifest_path), "rb") as fh:
        blob = fh.read()
    if len(blob) != manifest["blob_size"]:
        raise CorruptionError(
            f"blob size {len(blob)} != manifest size {manifest['blob_size']}"
        )
    if hashlib.sha256(blob).hexdigest() != manifest["sha256"]:
        raise CorruptionError("blob checksum mismatch")
    arrays = {}
    for rec in manifest["arrays"]:
        if rec["dtype"] != "f64le":
            raise CorruptionError(f"unsupported dtype {rec['dtype']!r}")
        n = rec["length"] // 8
        expect = int(np.prod(rec["shape"])) if rec["shape"] else 1
        if n != expect:
            raise CorruptionError(f"array {rec['name']!r} shape/length mismatch")
        a = np.frombuffer(blob, dtype="<f8", count=n,
                          offset=rec["offset"]).reshape(rec["shape"])
        arrays[rec["name"]] = a.copy()
    return arrays, manifest["meta"]


def emit_csv(header, rows, path: str):
    """RFC-4180-style CSV, '.' decimal separator, 17 significant digits."""
    def fmt(v):
        if isinstance(v, float) or isinstance(v, np.floating):
            return f"{float(v):.17g}"
        text = str(v)
        if any(c in text for c in ',"\n'):
            text = '"' + text.replace('"', '""') + '"'
        return text

    lines = [",".join(fmt(h) for h in header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    _atomic_write(path, ("\r\n".join(lines) + "\r\n").encode())
