"""Randomized per-offset lexicographic orders over sequence suffixes.

A mask is a bit vector indexed by *suffix offset*: ``flips[t] = 1`` means
that at offset ``t`` the order of '0' and '1' is swapped. Comparing two
suffixes under a mask is equivalent to XOR-ing each suffix with the mask
and comparing under the plain order. Every suffix is implicitly
terminated by a sentinel that orders above both symbols, so two distinct
suffixes never compare equal (the shorter one loses at its sentinel at
the latest) and selection of the first suffix is well defined.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend, rng
from .model import as_bits

__all__ = ["OrderingSet", "make_orderings", "compare_suffixes", "first_suffix_position"]

LESS = -1
EQUAL = 0
GREATER = 1


@dataclass(frozen=True, eq=False)
class OrderingSet:
    """``u`` masks of length ``n``, a pure function of ``(seed, u, n)``."""

    seed: int
    u: int
    n: int
    masks: np.ndarray  # shape (u, n), uint8

    def mask(self, j: int) -> np.ndarray:
        return self.masks[j]


def make_orderings(seed: int, u: int, n: int) -> OrderingSet:
    """Derive ``u`` independent masks of length ``n`` from ``seed``.

    Mask ``j`` comes from its own random substream, so any two encoders
    given equal ``(seed, u, n)`` build identical orderings.
    """
    if u < 1:
        raise ValueError(f"u must be at least 1, got {u}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    masks = np.empty((u, n), dtype=np.uint8)
    for j in range(u):
        masks[j] = rng.random_bits(rng.substream(seed, rng.ORDERING_BITS, j), n)
    masks.setflags(write=False)
    return OrderingSet(seed=seed, u=u, n=n, masks=masks)


def compare_suffixes(x, i: int, j: int, mask) -> int:
    """Compare the masked suffixes of ``x`` starting at 1-based ``i`` and ``j``.

    Returns -1, 0, or +1. Equality holds only for ``i == j``.
    """
    bits = as_bits(x)
    mask = as_bits(mask)
    n = bits.shape[0]
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"positions must be in [1, {n}], got i={i}, j={j}")
    if mask.shape[0] < n:
        raise ValueError("mask shorter than sequence")
    if i == j:
        return EQUAL
    a, b = bits[i - 1 :], bits[j - 1 :]
    short = min(a.shape[0], b.shape[0])
    diff = np.nonzero(a[:short] != b[:short])[0]
    if diff.size == 0:
        # equal through the shorter suffix; the sentinel of the shorter
        # one orders above the longer one's next symbol
        return LESS if a.shape[0] > b.shape[0] else GREATER
    t = int(diff[0])
    return LESS if (a[t] ^ mask[t]) < (b[t] ^ mask[t]) else GREATER


def first_suffix_position(x, mask) -> int:
    """1-based position of the suffix of ``x`` that is lexicographically
    first under ``mask``. Unique by the sentinel convention."""
    bits = as_bits(x)
    mask = as_bits(mask)
    return int(_backend.first_suffix(bits, mask))
