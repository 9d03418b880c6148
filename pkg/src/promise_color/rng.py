"""Counter-based random streams.

Every stream is keyed by a 64-bit master seed plus a tuple of integer counters
(restart index, trial index, ...), so results never depend on scheduling.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def generator(seed: int, *counters: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & MASK64, *(int(c) for c in counters)])
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *counters: int) -> int:
    ss = np.random.SeedSequence([int(seed) & MASK64, *(int(c) for c in counters)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
