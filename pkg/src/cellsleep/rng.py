"""Named, independent RNG streams derived from one scenario seed.

Each stream is seeded from (seed, sha256(name)), so adding a new stream
never perturbs draws on existing ones and two streams with different names
are statistically independent.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_rng(seed: int, name: str) -> np.random.Generator:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([int(seed), *words]))
