"""Counter-based random substreams keyed by (master seed, trajectory index)."""
from __future__ import annotations

import numpy as np


def substream(master_seed: int, index: int, tag: int = 0) -> np.random.Generator:
    """Independent Philox generator for one work unit.

    The stream depends only on ``(master_seed, tag, index)``, so results do
    not depend on how work units are scheduled.
    """
    if master_seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    ss = np.random.SeedSequence([int(master_seed), int(tag), int(index)])
    return np.random.Generator(np.random.Philox(ss))
