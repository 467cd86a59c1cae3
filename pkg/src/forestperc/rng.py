"""Reproducible random streams.

Every stochastic routine in the package draws from a counter-based
generator (Philox) keyed by ``(master_seed, stream label, *indices)``.
Streams are therefore independent of scheduling: trial k of a Monte
Carlo run reads the same numbers whether it executes first, last, or on
another thread, which is what makes experiment outputs byte-identical
across ``--threads`` settings.
"""
from __future__ import annotations

import zlib

import numpy as np


def substream(master_seed: int, label: str, *indices: int) -> np.random.Generator:
    """Independent generator for one purpose within one run.

    ``label`` names the purpose ("forest", "queries", ...) and is folded
    into the key through crc32, so adding a new stream never perturbs
    existing ones.  Integer ``indices`` (trial number, grid point, ...)
    extend the key for families of streams.
    """
    if not isinstance(master_seed, (int, np.integer)):
        raise ValueError(f"master_seed must be an integer, got {master_seed!r}")
    key = (zlib.crc32(label.encode("utf-8")),) + tuple(int(i) for i in indices)
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))
