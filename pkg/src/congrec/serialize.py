"""Canonical JSON serialization and content hashing.

Every artifact (model files, reports, manifests, HTTP bodies) goes through
``canonical_json_bytes`` so that equal values always produce equal bytes.
That is what makes seeded pipeline runs byte-reproducible and lets the
service/CLI parity checks compare raw output.
"""

import hashlib
import json
from pathlib import Path


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def canonical_json_bytes(obj) -> bytes:
    return canonical_json(obj).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def hash_json(obj) -> str:
    """Content hash of a JSON-serializable value, independent of file layout."""
    return sha256_hex(canonical_json_bytes(obj))


def hash_file(path) -> str:
    return sha256_hex(Path(path).read_bytes())


def dump_json(path, obj) -> None:
    """Write canonical JSON with a trailing newline."""
    Path(path).write_bytes(canonical_json_bytes(obj) + b"\n")


def load_json(path):
    return json.loads(Path(path).read_text("utf-8"))
