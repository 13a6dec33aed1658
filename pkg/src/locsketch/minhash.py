"""Min-hash baseline sketch at a matched bit budget.

Bottom-1 sketch: for each of ``H`` keyed 64-bit hash functions over the
packed k-mers of the sequence, store the low ``b`` bits of the minimal
hash value. The payload is ``B = H*b`` bits. Overlap is estimated from
the fingerprint match fraction via a collision-corrected Jaccard estimate
and the k-mer-set identity ``J = theta / (2 - theta)`` for suffix-prefix
overlaps (intersection ~ theta*n of the ~(2-theta)*n distinct k-mers).
"""

import struct
from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from . import _backend, rng
from .errors import IncompatibleSketchError, SketchFormatError
from .model import as_bits

__all__ = [
    "MinHashParams",
    "MinHashSketch",
    "default_kmer_length",
    "minhash_sketch",
    "minhash_estimate",
    "overlap_from_jaccard",
    "serialize",
    "deserialize",
]

MAGIC = b"MHS1"
_HEADER = struct.Struct("<4sQIHBQ")  # magic, n, H, k, b, seed
_MASK64 = (1 << 64) - 1


def default_kmer_length(n: int) -> int:
    """ceil(3*log2 n): long enough that i.i.d. sequences almost never
    share a k-mer by chance."""
    return ceil(3 * log2(n))


@dataclass(frozen=True)
class MinHashParams:
    n: int
    num_hashes: int
    bits: int
    seed: int
    kmer_len: int = 0  # 0 means: use default_kmer_length(n)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.num_hashes < 1:
            raise ValueError(f"num_hashes must be at least 1, got {self.num_hashes}")
        if not 1 <= self.bits <= 64:
            raise ValueError(f"bits must be in [1, 64], got {self.bits}")
        if self.kmer_len == 0:
            object.__setattr__(self, "kmer_len", default_kmer_length(self.n))
        if not 1 <= self.kmer_len <= 64:
            raise ValueError(f"kmer_len must be in [1, 64], got {self.kmer_len}")
        if self.kmer_len > self.n:
            raise ValueError(f"kmer_len {self.kmer_len} exceeds n={self.n}")
        object.__setattr__(self, "seed", self.seed & _MASK64)

    @property
    def payload_bits(self) -> int:
        return self.num_hashes * self.bits

    def keys(self) -> np.ndarray:
        gen = rng.substream(self.seed, rng.FINGERPRINT_KEYS)
        return rng.random_u64(gen, self.num_hashes)


@dataclass(frozen=True, eq=False)
class MinHashSketch:
    params: MinHashParams
    fingerprints: np.ndarray  # shape (H,), uint64, each < 2**bits

    def __eq__(self, other):
        if not isinstance(other, MinHashSketch):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.fingerprints, other.fingerprints)


def minhash_sketch(x, params: MinHashParams) -> MinHashSketch:
    """Sketch ``x``: per hash function, the b-bit fingerprint of the
    minimal k-mer hash. Position ties are irrelevant because equal hash
    values yield equal fingerprints."""
    bits = as_bits(x)
    if bits.shape[0] != params.n:
        raise ValueError(f"sequence length {bits.shape[0]} does not match params.n={params.n}")
    kmers = _backend.pack_kmers(bits, params.kmer_len)
    mins = _backend.min_kmer_hashes(kmers, params.keys())
    fp_mask = np.uint64(_MASK64 if params.bits == 64 else (1 << params.bits) - 1)
    fingerprints = mins & fp_mask
    fingerprints.setflags(write=False)
    return MinHashSketch(params=params, fingerprints=fingerprints)


def overlap_from_jaccard(jaccard: float) -> float:
    """Invert J = theta/(2 - theta): theta = 2J/(1 + J), clamped to [0, 1]."""
    jaccard = max(0.0, jaccard)
    return min(1.0, 2.0 * jaccard / (1.0 + jaccard))


def minhash_estimate(s1: MinHashSketch, s2: MinHashSketch) -> float:
    """Overlap estimate in [0, 1] from fingerprint agreement.

    The raw match fraction is corrected for the 2^-b chance collision
    rate, then mapped through :func:`overlap_from_jaccard`.
    """
    for field in ("n", "num_hashes", "bits", "seed", "kmer_len"):
        a, b = getattr(s1.params, field), getattr(s2.params, field)
        if a != b:
            raise IncompatibleSketchError(
                f"sketches disagree on {field}: {a} != {b}", field=field
            )
    f = float(np.mean(s1.fingerprints == s2.fingerprints))
    collision = 2.0 ** -s1.params.bits
    return overlap_from_jaccard((f - collision) / (1.0 - collision))


def serialize(sketch: MinHashSketch) -> bytes:
    """Encode as: "MHS1", n u64 LE, H u32 LE, k u16 LE, b u8, seed u64 LE,
    then H fingerprints of ceil(b/8) bytes each, little-endian."""
    p = sketch.params
    header = _HEADER.pack(MAGIC, p.n, p.num_hashes, p.kmer_len, p.bits, p.seed)
    width = (p.bits + 7) // 8
    body = b"".join(int(fp).to_bytes(width, "little") for fp in sketch.fingerprints)
    return header + body


def deserialize(data: bytes) -> MinHashSketch:
    if len(data) < _HEADER.size:
        raise SketchFormatError("truncated header", field="header")
    magic, n, num_hashes, kmer_len, bits, seed = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SketchFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", field="magic")
    if n < 2:
        raise SketchFormatError(f"n must be at least 2, got {n}", field="n")
    if num_hashes < 1:
        raise SketchFormatError(f"H must be positive, got {num_hashes}", field="H")
    if not 1 <= bits <= 64:
        raise SketchFormatError(f"b must be in [1, 64], got {bits}", field="b")
    if not 1 <= kmer_len <= min(n, 64):
        raise SketchFormatError(f"k out of range, got {kmer_len}", field="k")
    width = (bits + 7) // 8
    payload = data[_HEADER.size :]
    if len(payload) != num_hashes * width:
        raise SketchFormatError(
            f"payload has {len(payload)} bytes, expected {num_hashes * width}", field="payload"
        )
    fp_mask = _MASK64 if bits == 64 else (1 << bits) - 1
    fingerprints = np.empty(num_hashes, dtype=np.uint64)
    for j in range(num_hashes):
        val = int.from_bytes(payload[j * width : (j + 1) * width], "little")
        if val & ~fp_mask:
            raise SketchFormatError(
                f"fingerprint {j} does not fit in {bits} bits", field="payload"
            )
        fingerprints[j] = val
    fingerprints.setflags(write=False)
    params = MinHashParams(n=n, num_hashes=num_hashes, bits=bits, seed=seed, kmer_len=kmer_len)
    return MinHashSketch(params=params, fingerprints=fingerprints)
