"""Deterministic named sub-streams derived from one global seed.

Every random component draws from its own stream, so changing e.g. the
number of permutations never shifts the randomness used by fold splitting.
Derivation is by hashing, which keeps seeds stable across platforms and
independent of execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def child_seed(base_seed, *labels):
    """Derive a 64-bit seed from a base seed and a path of labels."""
    path = "/".join(str(label) for label in labels)
    digest = hashlib.sha256(f"{base_seed}/{path}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(base_seed, *labels):
    """A numpy Generator seeded from the named sub-stream."""
    return np.random.default_rng(child_seed(base_seed, *labels))
