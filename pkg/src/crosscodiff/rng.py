"""Seeded random sources with reproducible substream splitting."""

from __future__ import annotations

import numpy as np


def make_rng(seed: int | np.random.SeedSequence | None = None) -> np.random.Generator:
    """Return a PCG64 generator for ``seed`` (an int or a ``SeedSequence``)."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.default_rng(seed)


def substream_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    """Seed sequence addressed by ``key`` under ``master_seed``.

    Addressing by key (rather than spawning in order) makes every substream
    independent of how many others were drawn before it, so replications
    can run in any order or process.
    """
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))


def substream(master_seed: int, *key: int) -> np.random.Generator:
    return make_rng(substream_seed(master_seed, *key))


def split(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Split ``rng`` into ``n`` independent child generators."""
    return list(rng.spawn(n))
