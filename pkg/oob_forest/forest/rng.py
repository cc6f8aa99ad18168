"""
Reproducible random streams

Every consumer of randomness gets its own generator keyed by
(master seed, purpose, index...). Keys are mixed by numpy's SeedSequence
hash and drive a counter-based Philox generator, so a stream depends only
on its key and never on which thread or in which order it is used.
"""

from typing import Tuple

import numpy as np

# Purpose tags keep streams for different jobs disjoint
TREE_STREAM = 0
BOOTSTRAP_CI_STREAM = 1
DATAGEN_STREAM = 2
REPLICATION_STREAM = 3


def derive_stream(master_seed: int, *keys: int) -> np.random.Generator:
    """Generator for the stream identified by (master_seed, *keys)"""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


def derive_seeds(master_seed: int, *keys: int, count: int = 1) -> Tuple[int, ...]:
    """Plain integer seeds derived from (master_seed, *keys), for APIs that take an int"""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))
    state = seq.generate_state(count, dtype=np.uint32)
    return tuple(int(s) for s in state)


def tree_stream(master_seed: int, tree_index: int) -> np.random.Generator:
    return derive_stream(master_seed, TREE_STREAM, tree_index)
