"""Counter-based random number generation.

Every draw is a pure function of (master seed, stream id, draw index), so a
value can be regenerated without replaying the stream and results do not
depend on execution order, thread count, or NumPy version.

Construction: a stream key is derived by folding (seed, stream id) through
the SplitMix64 finalizer; draw ``i`` of a stream is
``mix64(key + (i + 1) * GOLDEN) / 2**64`` truncated to 53 bits, giving a
uniform double in [0, 1).
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV_2_53 = 2.0**-53


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit mixing function."""
    x &= _MASK
    x ^= x >> 30
    x = (x * _MIX_A) & _MASK
    x ^= x >> 27
    x = (x * _MIX_B) & _MASK
    x ^= x >> 31
    return x


def derive_key(*parts: int) -> int:
    """Fold integers into one 64-bit key (order-sensitive).

    Used for stream keys and for per-trial seed derivation in experiment
    sweeps. Negative inputs are reduced modulo 2**64.
    """
    h = 0
    for p in parts:
        h = mix64(((h ^ (p & _MASK)) + _GOLDEN) & _MASK)
    return h


def _mix64_array(x: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64, matching mix64 above bit for bit
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX_A)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX_B)
    x ^= x >> np.uint64(31)
    return x


class Stream:
    """A reproducible uniform stream identified by (seed, stream_id).

    ``uniform_at``/``uniform_block`` are pure reads at given draw indices;
    ``next_uniform`` keeps a cursor for one-at-a-time use. State is owned by
    the caller, never shared, so concurrent use of distinct streams is safe.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = seed
        self.stream_id = stream_id
        self.key = derive_key(seed, stream_id)
        self.cursor = 0

    def uniform_at(self, index: int) -> float:
        """The draw at a given index, in [0, 1)."""
        if index < 0:
            raise ValueError("draw index must be nonnegative")
        word = mix64((self.key + (index + 1) * _GOLDEN) & _MASK)
        return (word >> 11) * _INV_2_53

    def uniform_block(self, start: int, count: int) -> np.ndarray:
        """Draws ``start .. start+count-1`` as a float64 array in [0, 1)."""
        if start < 0 or count < 0:
            raise ValueError("start and count must be nonnegative")
        idx = np.arange(1, count + 1, dtype=np.uint64)
        idx += np.uint64(start)
        idx *= np.uint64(_GOLDEN)
        idx += np.uint64(self.key)
        words = _mix64_array(idx)
        return (words >> np.uint64(11)) * _INV_2_53

    def next_uniform(self) -> float:
        """The draw at the current cursor; advances the cursor."""
        value = self.uniform_at(self.cursor)
        self.cursor += 1
        return value
