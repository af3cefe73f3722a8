"""Counter-based random streams.

Every trial draws from its own Philox generator keyed by (seed, *path), so a
trial's numbers do not depend on execution order or thread count.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *(int(p) for p in path)])
    return np.random.Generator(np.random.Philox(ss))
