"""Counter-based random streams.

Every stochastic routine in the package draws from a Philox generator keyed
by an explicit tuple (seed, member, epoch, ...).  Streams are therefore
independent of execution order, which is what makes ensembles parallelizable
and runs bit-reproducible.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for the stream keyed by (seed, *key)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
