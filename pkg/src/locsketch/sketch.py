"""Location sketches: positions of first suffixes, truncated to v bits.

A sketch of a length-``n`` sequence holds, for each of ``u`` random
orderings, the v-bit truncation of ``m/n`` where ``m`` is the position of
the lexicographically first suffix under that ordering. The payload is
``B = u*v`` bits. The ``.lsk`` byte format is fixed bit-exactly so that
sketches are interchangeable across encoders, platforms, and runs.
"""

import struct
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import SketchFormatError
from .lexorder import make_orderings
from .model import as_bits

__all__ = [
    "SketchParams",
    "LocationalSketch",
    "truncate",
    "make_sketch",
    "serialize",
    "deserialize",
]

MAGIC = b"LSK1"
_HEADER = struct.Struct("<4sQIBQ")  # magic, n, u, v, seed
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SketchParams:
    n: int
    u: int
    v: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        if self.u < 1:
            raise ValueError(f"u must be at least 1, got {self.u}")
        if not 1 <= self.v <= 32:
            raise ValueError(f"v must be in [1, 32], got {self.v}")
        object.__setattr__(self, "seed", self.seed & _MASK64)

    @property
    def payload_bits(self) -> int:
        return self.u * self.v


@dataclass(frozen=True, eq=False)
class LocationalSketch:
    params: SketchParams
    entries: np.ndarray  # shape (u,), uint32, each < 2**v

    def __eq__(self, other):
        if not isinstance(other, LocationalSketch):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.entries, other.entries)


def truncate(m: int, n: int, v: int) -> int:
    """v-bit truncation of the position ratio m/n as an integer.

    Exact integer arithmetic: ``floor(m * 2^v / n)``, clamped to
    ``2^v - 1`` so the boundary ``m = n`` still fits in v bits.
    """
    if not 1 <= v <= 32:
        raise ValueError(f"v must be in [1, 32], got {v}")
    if not 1 <= m <= n:
        raise ValueError(f"position must be in [1, {n}], got {m}")
    return min((m << v) // n, (1 << v) - 1)


def make_sketch(x, params: SketchParams) -> LocationalSketch:
    """Sketch ``x``: one truncated first-suffix position per ordering."""
    bits = as_bits(x)
    if bits.shape[0] != params.n:
        raise ValueError(f"sequence length {bits.shape[0]} does not match params.n={params.n}")
    orderings = make_orderings(params.seed, params.u, params.n)
    positions = _backend.first_suffix_batch(bits, orderings.masks)
    entries = np.array(
        [truncate(int(m), params.n, params.v) for m in positions], dtype=np.uint32
    )
    entries.setflags(write=False)
    return LocationalSketch(params=params, entries=entries)


def serialize(sketch: LocationalSketch) -> bytes:
    """Encode as: "LSK1", n u64 LE, u u32 LE, v u8, seed u64 LE, then the
    u entries packed MSB-first into ceil(u*v/8) bytes (last byte
    zero-padded)."""
    p = sketch.params
    header = _HEADER.pack(MAGIC, p.n, p.u, p.v, p.seed)
    acc = 0
    for e in sketch.entries:
        acc = (acc << p.v) | int(e)
    nbits = p.u * p.v
    pad = -nbits % 8
    acc <<= pad
    return header + acc.to_bytes((nbits + pad) // 8, "big")


def deserialize(data: bytes) -> LocationalSketch:
    """Inverse of :func:`serialize`; rejects malformed input with the
    offending field named."""
    if len(data) < _HEADER.size:
        raise SketchFormatError("truncated header", field="header")
    magic, n, u, v, seed = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SketchFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", field="magic")
    if n < 1:
        raise SketchFormatError(f"n must be positive, got {n}", field="n")
    if u < 1:
        raise SketchFormatError(f"u must be positive, got {u}", field="u")
    if not 1 <= v <= 32:
        raise SketchFormatError(f"v must be in [1, 32], got {v}", field="v")
    nbits = u * v
    nbytes = (nbits + 7) // 8
    payload = data[_HEADER.size :]
    if len(payload) < nbytes:
        raise SketchFormatError(
            f"payload has {len(payload)} bytes, expected {nbytes}", field="payload"
        )
    if len(payload) > nbytes:
        raise SketchFormatError(
            f"{len(payload) - nbytes} trailing bytes after payload", field="payload"
        )
    acc = int.from_bytes(payload, "big")
    pad = -nbits % 8
    if acc & ((1 << pad) - 1):
        raise SketchFormatError("nonzero padding bits in final byte", field="payload")
    acc >>= pad
    mask = (1 << v) - 1
    entries = np.empty(u, dtype=np.uint32)
    for j in range(u - 1, -1, -1):
        entries[j] = acc & mask
        acc >>= v
    entries.setflags(write=False)
    return LocationalSketch(params=SketchParams(n=n, u=u, v=v, seed=seed), entries=entries)
