"""Counter-based random streams keyed by (seed, series, trial).

Every trial owns an independent stream, so work can be split across any
number of workers without changing a single draw. The mixing function is
the SplitMix64 finalizer; all arithmetic is modulo 2**64. The compiled
kernels implement the same functions bit for bit.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def trial_key(seed: int, series: int, trial: int) -> int:
    k = mix64(seed + GOLDEN)
    k = mix64(k + (series + 1) * GOLDEN)
    return mix64(k + (trial + 1) * GOLDEN)


def stream_word(key: int, counter: int) -> int:
    return mix64(key + (counter + 1) * GOLDEN)


def uniform_below(key: int, counter: int, bound: int) -> tuple[int, int]:
    """Unbiased integer in [0, bound) by rejection; returns (value, next counter)."""
    limit = (1 << 64) - ((1 << 64) % bound)
    while True:
        x = stream_word(key, counter)
        counter += 1
        if x < limit:
            return x % bound, counter


def sample_link_indices(key: int, n: int, n_d: int) -> list[int]:
    """Partial Fisher-Yates over the n*n flat link indices; sorted result."""
    total = n * n
    if not 0 <= n_d <= total:
        raise ValueError(f"n_d={n_d} outside [0, {total}]")
    pool = list(range(total))
    counter = 0
    for k in range(n_d):
        r, counter = uniform_below(key, counter, total - k)
        r += k
        pool[k], pool[r] = pool[r], pool[k]
    return sorted(pool[:n_d])


# -- vectorized versions for the numpy backend ------------------------------

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_NM1 = np.uint64(_M1)
_NM2 = np.uint64(_M2)
_NG = np.uint64(GOLDEN)


def mix64_np(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _U30)
    z = z * _NM1
    z = z ^ (z >> _U27)
    z = z * _NM2
    return z ^ (z >> _U31)


def trial_keys_np(seed: int, series: int, trials: np.ndarray) -> np.ndarray:
    base = mix64(mix64(seed + GOLDEN) + (series + 1) * GOLDEN)
    t = np.asarray(trials, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64_np(np.uint64(base) + (t + np.uint64(1)) * _NG)


def stream_words_np(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return mix64_np(keys + (counters.astype(np.uint64) + np.uint64(1)) * _NG)


def sample_link_indices_np(keys: np.ndarray, n: int, n_d: int) -> np.ndarray:
    """Batch of canonical cut sets, one row per key; shape (len(keys), n_d)."""
    total = n * n
    if not 0 <= n_d <= total:
        raise ValueError(f"n_d={n_d} outside [0, {total}]")
    keys = np.asarray(keys, dtype=np.uint64)
    b = keys.shape[0]
    pool = np.tile(np.arange(total, dtype=np.int32), (b, 1))
    counters = np.zeros(b, dtype=np.int64)
    rows = np.arange(b)
    for k in range(n_d):
        bound = total - k
        rem = (1 << 64) % bound
        x = stream_words_np(keys, counters)
        counters += 1
        if rem == 0:
            bad = np.zeros(b, dtype=bool)
        else:
            limit = np.uint64((1 << 64) - rem)
            bad = x >= limit
        while bad.any():  # probability ~ bound / 2**64 per draw
            x[bad] = stream_words_np(keys[bad], counters[bad])
            counters[bad] += 1
            bad = x >= limit
        r = (x % np.uint64(bound)).astype(np.int64) + k
        a = pool[rows, k].copy()
        pool[rows, k] = pool[rows, r]
        pool[rows, r] = a
    return np.sort(pool[:, :n_d], axis=1)
