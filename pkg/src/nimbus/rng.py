"""Deterministic random number utilities.

Two kinds of randomness are used in this package:

* ``np.random.Generator`` streams derived from a master seed via
  ``SeedSequence`` spawning, for training, augmentation and dataset
  generation.  Each consumer gets its own stream so parallel or reordered
  execution never changes results.

* A counter-based generator for path tracing.  Every (pixel, sample)
  pair owns an independent stream addressed by a 64-bit id, and draws
  are pure functions of (key, stream, counter).  This makes forward
  renders bitwise reproducible and lets the backward pass replay the
  exact random walk of the forward pass.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "child_seed", "CounterRng"]


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """A generator uniquely determined by a master seed and an index path."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(ss)


def child_seed(master_seed: int, *path: int) -> int:
    """A 63-bit integer seed derived from (master_seed, path)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 arithmetic wraps modulo 2**64.
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


class CounterRng:
    """Counter-based uniform generator over independent streams.

    ``uniform(stream_ids, counters)`` is a pure function: identical
    arguments always produce identical values, which is the property the
    path-replay backward pass relies on.
    """

    def __init__(self, seed: int):
        self.key = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)

    def uniform(self, stream_ids: np.ndarray, counters: np.ndarray) -> np.ndarray:
        """U[0,1) draws, one per (stream, counter) pair."""
        s = stream_ids.astype(np.uint64, copy=False)
        c = counters.astype(np.uint64, copy=False)
        h = _mix64(self.key + _GAMMA * (s + np.uint64(1)))
        h = _mix64(h ^ _mix64(c * _GAMMA + np.uint64(0x632BE59BD9B4E019)))
        # 53-bit mantissa: exactly representable doubles in [0, 1)
        return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
