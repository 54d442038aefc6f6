"""
Per-session randomness.

Every session owns one seed. Named, independent generator streams are
spawned from it in a fixed order so that each actor's draws do not shift
when another actor draws more or fewer numbers.
"""

from __future__ import annotations

import numpy as np

STREAMS = ("key", "alice", "receivers", "channel", "adversary", "measurement")


class SessionRandomness:
    """Named ``numpy.random.Generator`` streams derived from one seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        children = np.random.SeedSequence(self.seed).spawn(len(STREAMS))
        self._streams = {
            name: np.random.default_rng(child) for name, child in zip(STREAMS, children)
        }

    def __getattr__(self, name: str) -> np.random.Generator:
        streams = self.__dict__.get("_streams", {})
        if name in streams:
            return streams[name]
        raise AttributeError(name)


def spawn_session_seeds(master_seed: int, count: int) -> list[int]:
    """Independent 63-bit session seeds split from a master seed."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)) for child in children]
