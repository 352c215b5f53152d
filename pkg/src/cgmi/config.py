"""Flat key/value run configuration files.

Format: one `key = value` pair per line, `#` starts a comment, blank lines
ignored.  Keys use the same spelling as the corresponding CLI flag without
the leading dashes.  Values stay strings here; the CLI casts them when it
resolves options (flags always win over file values).
"""

from __future__ import annotations

import hashlib
import json


def read_config(path) -> dict:
    mapping = {}
    with open(path, encoding="utf-8") as stream:
        for number, raw in enumerate(stream, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {number}: expected 'key = value'")
            key, value = line.split("=", 1)
            key = key.strip()
            if not key:
                raise ValueError(f"{path}: line {number}: empty key")
            if key in mapping:
                raise ValueError(f"{path}: line {number}: duplicate key {key!r}")
            mapping[key] = value.strip()
    return mapping


def parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    lowered = str(value).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def config_hash(options: dict) -> str:
    """Stable digest of fully resolved options, for run provenance."""
    canonical = json.dumps(options, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
