"""Named, reproducible random substreams.

All randomness in the library flows from a single integer seed.  Independent
components derive their own generator from (seed, *keys) so that results do
not depend on evaluation order or thread count.
"""
from __future__ import annotations

import hashlib

import numpy as np


def _key_words(keys: tuple) -> tuple[int, ...]:
    # Stable across platforms and processes: hash the repr of the key tuple.
    digest = hashlib.sha256(repr(keys).encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))


def substream(seed: int, *keys) -> np.random.Generator:
    """Return a Generator for the substream identified by ``(seed, *keys)``.

    Identical arguments give bit-identical streams; distinct key tuples give
    statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=_key_words(tuple(keys)))
    return np.random.Generator(np.random.PCG64(ss))
