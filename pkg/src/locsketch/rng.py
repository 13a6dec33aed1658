"""Deterministic, splittable random streams.

Every random draw in the package comes from a Philox4x64-10 counter-based
generator addressed by ``(seed, purpose, id1, id2)``:

* ``seed`` and ``purpose`` form the 128-bit Philox key,
* ``id1``/``id2`` are placed in the two *high* words of the 256-bit
  counter, so distinct ids yield provably non-overlapping streams (the
  generator increments the counter from the low word up).

Philox output is platform-independent, which makes sketches, experiment
records, and CSV output byte-reproducible across machines and across any
degree of parallelism.
"""

import numpy as np

_MASK64 = (1 << 64) - 1

# Purpose tags (second Philox key word). One per kind of randomness so
# that, e.g., source bits and channel flips never share a stream.
SOURCE_BITS = 0x01
ORDERING_BITS = 0x02
CHANNEL_FLIPS = 0x03
FINGERPRINT_KEYS = 0x04
TRIAL_STREAM = 0x05
BOOTSTRAP = 0x06


def substream(seed: int, purpose: int, id1: int = 0, id2: int = 0) -> np.random.Generator:
    """Return the Generator for stream ``(seed, purpose, id1, id2)``."""
    key = np.array([seed & _MASK64, purpose & _MASK64], dtype=np.uint64)
    counter = np.array([0, 0, id2 & _MASK64, id1 & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def random_bits(gen: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` uniform bits as a uint8 array of 0s and 1s.

    Bits are the MSB-first unpacking of the generator's byte stream, a
    fixed mapping independent of numpy's sampling internals.
    """
    if n < 0:
        raise ValueError("bit count must be nonnegative")
    if n == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = np.frombuffer(gen.bytes((n + 7) // 8), dtype=np.uint8)
    return np.unpackbits(raw)[:n]


def random_u64(gen: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` uint64 words (little-endian view of the byte stream)."""
    return np.frombuffer(gen.bytes(8 * n), dtype="<u8").copy()


def derive_seeds(seed: int, purpose: int, id1: int = 0, id2: int = 0, count: int = 1) -> list[int]:
    """Derive ``count`` fresh 64-bit seeds from a parent stream."""
    gen = substream(seed, purpose, id1, id2)
    return [int(w) for w in random_u64(gen, count)]
