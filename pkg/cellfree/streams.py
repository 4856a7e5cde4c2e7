"""
Counter-based random substreams.

Every random draw in the simulator comes from a generator keyed by
``(seed, *keys)``. The keys name what is being drawn (a ``Stream``
member) plus any counters (drop index, Monte-Carlo batch index). Two
workers that use different keys never share a stream, and a drop or a
batch can be recomputed on its own from its keys alone. This keeps
parallel campaigns reproducible whatever the completion order.
"""
from enum import IntEnum

import numpy as np

from .exceptions import ParameterError


class Stream(IntEnum):
    DEPLOYMENT = 1
    LARGE_SCALE = 2
    PILOTS = 3
    REALIZATION = 4
    PILOT_NOISE = 5
    SYMBOLS = 6
    UPLINK_NOISE = 7
    DROP = 8
    BATCH = 9
    PROBES = 10


def _sequence(seed, keys):
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))


def substream(seed, *keys):
    """Generator for the substream named by ``keys`` under ``seed``."""
    return np.random.default_rng(_sequence(seed, keys))


def derive_seed(seed, *keys):
    """Child integer seed, used where a seed is handed to another component."""
    return int(_sequence(seed, keys).generate_state(1, np.uint64)[0])
