"""
SplitMix64, the portable generator behind every synthetic scene.

A stream is fully described by a 64-bit seed and a stream id::

    state_0 = mix(seed + stream * 0xD1B54A32D192ED03)      (mod 2**64)
    out_k   = mix(state_0 + k * 0x9E3779B97F4A7C15),  k = 1, 2, ...

    mix(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
            return z ^ (z >> 31)

Uniforms are ``(out >> 11) * 2**-53`` in [0, 1). Normals come from
Box-Muller on a block of ``2n`` uniforms: the first ``n`` give
``u1 = 1 - u`` (so ``u1`` is in (0, 1]), the last ``n`` give ``u2``, and
``z = sqrt(-2 ln u1) * cos(2 pi u2)``.
"""

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
STREAM_MULT = 0xD1B54A32D192ED03
MASK = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def mix64(value: int) -> int:
    return int(_mix(np.array([value & MASK], dtype=np.uint64))[0])


class SplitMix64:
    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._state = mix64((self.seed + self.stream * STREAM_MULT) & MASK)
        self._drawn = 0

    def next_u64(self, n: int) -> np.ndarray:
        k = np.arange(self._drawn + 1, self._drawn + n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            counters = np.uint64(self._state) + k * np.uint64(GOLDEN)
        self._drawn += n
        return _mix(counters)

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        return low + (high - low) * u

    def integers(self, n: int, low: int, high: int) -> np.ndarray:
        """Integers in ``[low, high)`` via ``floor(u * (high - low))``."""
        return low + np.floor(self.uniform(n) * (high - low)).astype(np.int64)

    def normal(self, n: int) -> np.ndarray:
        u = self.uniform(2 * n)
        u1 = 1.0 - u[:n]
        u2 = u[n:]
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
