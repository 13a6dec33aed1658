"""Shared brute-force oracles, kept independent of the code they check."""

from fractions import Fraction

import numpy as np
import pytest

_M64 = (1 << 64) - 1


def masked_suffix_key(bits, mask, i):
    """The masked suffix starting at 0-based ``i`` as a tuple, sentinel 2
    appended (sentinel orders above both symbols)."""
    n = len(bits)
    return tuple(int(bits[i + t] ^ mask[t]) for t in range(n - i)) + (2,)


def suffix_sort_oracle(bits, mask):
    """1-based argmin by fully materializing and sorting all suffixes."""
    n = len(bits)
    order = sorted(range(n), key=lambda i: masked_suffix_key(bits, mask, i))
    return order[0] + 1


def truncate_oracle(m, n, v):
    """Truncation via exact rationals instead of integer division."""
    return min(int(Fraction(m, n) * (1 << v)), (1 << v) - 1)


def splitmix_oracle(x):
    x &= _M64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _M64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def minhash_oracle(bits, k, keys, b):
    """Fingerprints by enumerating every k-mer per hash, pure Python ints."""
    n = len(bits)
    fps = []
    for key in keys:
        best = None
        for i in range(n - k + 1):
            val = 0
            for t in range(k):
                val = (val << 1) | int(bits[i + t])
            h = splitmix_oracle(val ^ int(key))
            if best is None or h < best:
                best = h
        fps.append(best & ((1 << b) - 1))
    return fps


def has_repeat_oracle(bits, k):
    n = len(bits)
    seen = set()
    for i in range(n - k + 1):
        window = tuple(int(b) for b in bits[i : i + k])
        if window in seen:
            return True
        seen.add(window)
    return False


@pytest.fixture
def np_rng():
    return np.random.default_rng(20260810)
