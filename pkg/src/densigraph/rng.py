"""Keyed, counter-based random number generation.

Every random draw in this package is a pure function of a 64-bit seed plus a
chain of integer or string labels.  This keeps each draw addressable: the
stationary sampler can query the randomness attached to an arbitrary
space-time site (including negative times) without generating anything else,
and replicated experiments can run in any order, or in parallel, and still
produce identical output.

The core primitive is the splitmix64 finalizer (`mix64`), a cheap bijection
on 64-bit words with full avalanche.  Keys are built by absorbing labels one
at a time (`absorb`, `derive_key`); sequential draws from a key are produced
counter-style (`word`, `Stream`).  Scalar paths use plain Python integers
(numpy scalars warn on wraparound); batch paths use uint64 arrays, which wrap
silently.  Both paths implement the same function and are tested against
each other.
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF

# splitmix64 constants: increment is 2^64 / golden ratio.
_PHI = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# Domain separator so that derive_key(seed) != mix64(seed).
_DOMAIN = 0x243F6A8885A308D3

# Multiplier mapping the top 53 bits of a word to [0, 1).
_U01 = 2.0 ** -53

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(x: int) -> int:
    """splitmix64 finalizer: bijective, full-avalanche mix of a 64-bit word."""
    x &= MASK64
    x ^= x >> 30
    x = (x * _M1) & MASK64
    x ^= x >> 27
    x = (x * _M2) & MASK64
    return x ^ (x >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized `mix64` over a uint64 array."""
    x = np.array(x, dtype=np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_M1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_M2)
    x ^= x >> np.uint64(31)
    return x


def _label64(label: str) -> int:
    """FNV-1a hash of a string label (stable across runs and platforms)."""
    h = _FNV_OFFSET
    for b in label.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def absorb(state: int, value: int) -> int:
    """Fold one integer label into a key. Injective in `value` for fixed state."""
    return mix64(((state + _PHI) & MASK64) ^ (value & MASK64))


def absorb_array(state, values: np.ndarray) -> np.ndarray:
    """Vectorized `absorb`; `values` may be any integer dtype (negatives wrap)."""
    v = np.asarray(values, dtype=np.int64).astype(np.uint64)
    s = np.asarray(state, dtype=np.uint64)
    return mix64_array((s + np.uint64(_PHI)) ^ v)


def derive_key(seed: int, *parts: int | str) -> int:
    """Derive a stream key from a master seed and a chain of labels."""
    state = mix64((seed & MASK64) ^ _DOMAIN)
    for part in parts:
        if isinstance(part, str):
            part = _label64(part)
        state = absorb(state, part)
    return state


def word(key: int, counter: int) -> int:
    """Counter-indexed 64-bit output word of a key."""
    return mix64((key + _PHI * (counter + 1)) & MASK64)


def word_array(keys: np.ndarray, counter: int) -> np.ndarray:
    """Vectorized `word` over an array of keys, one fixed counter."""
    k = np.asarray(keys, dtype=np.uint64)
    return mix64_array(k + np.uint64((_PHI * (counter + 1)) & MASK64))


def uniform01(w: int) -> float:
    """Map a 64-bit word to a uniform float in [0, 1) (53-bit resolution)."""
    return (w >> 11) * _U01


def uniform01_array(w: np.ndarray) -> np.ndarray:
    return (w >> np.uint64(11)) * _U01


class Stream:
    """Sequential uniform stream over the counter axis of a key.

    Draw k (1-based) is `uniform01(word(key, k-1))`; `uniforms(n)` consumes n
    consecutive draws.  Instances are cheap and single-use by convention: one
    stream per logical consumer, with keys derived via `derive_key`.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int):
        self.key = key & MASK64
        self.counter = 0

    def uniform(self) -> float:
        u = uniform01(word(self.key, self.counter))
        self.counter += 1
        return u

    def uniforms(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        words = mix64_array(
            np.uint64(self.key) + np.uint64(_PHI) * (idx + np.uint64(1))
        )
        return uniform01_array(words)
