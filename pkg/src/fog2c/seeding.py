"""Named random streams derived from one master seed.

Every consumer asks for ``stream(seed, "allocate", strategy, request_id)``; the
names are hashed into the ``spawn_key`` of a :class:`numpy.random.SeedSequence`
so that adding a consumer never shifts another consumer's draws.
"""
from __future__ import annotations

import hashlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)) and not isinstance(part, bool):
        return int(part)
    digest = hashlib.sha256(str(part).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def seed_sequence(seed: int, *names) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=tuple(_key(n) for n in names))


def stream(seed: int, *names) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed, *names))
