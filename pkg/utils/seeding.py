"""Named random sub-streams derived from a single run seed."""

import zlib

import numpy as np

MAP_STREAM = "map"
POLICY_STREAM = "policy"
WAYPOINT_STREAM = "waypoints"


def substream(seed: int, name: str) -> np.random.Generator:
    """
    Return an independent generator for `name` under `seed`.

    The same (seed, name) pair always yields the same stream, and streams
    with different names do not overlap.
    """
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))
