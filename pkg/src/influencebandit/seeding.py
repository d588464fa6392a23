"""Deterministic, splittable seed derivation.

Hashing the (base_seed, replication, stream) tuple keeps every random
stream independent: changing the policy stream never perturbs the pool or
reward streams, so compared policies face identical environments.
"""

from __future__ import annotations

import hashlib

STREAMS = ("pool", "reward", "policy", "env")


def seed_schedule(base_seed: int, replication_index: int, stream: str) -> int:
    """64-bit seed derived by hashing the tuple; same tuple, same seed."""
    blob = f"{base_seed}:{replication_index}:{stream}".encode()
    digest = hashlib.sha256(blob).digest()
    return int.from_bytes(digest[:8], "little")
