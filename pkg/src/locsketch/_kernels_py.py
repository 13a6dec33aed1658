"""Pure-numpy fallback for the compiled kernels in ``_kernels.pyx``.

Selected automatically when the extension is unavailable (or forced via
``LOCSKETCH_BACKEND=py``). Results are bit-identical to the compiled
versions; only speed differs.
"""

import numpy as np

BACKEND_NAME = "python"

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


def first_suffix(bits: np.ndarray, mask: np.ndarray) -> int:
    """1-based position of the lexicographically first masked suffix.

    Tournament filter: at offset t, keep the candidates whose masked
    symbol attains the minimum; candidates whose suffix has ended carry
    the terminator, which orders above both symbols, so they are dropped
    whenever any live candidate remains. Suffix lengths are distinct, so
    the filter always narrows to a single survivor.
    """
    n = bits.shape[0]
    if n == 0:
        raise ValueError("empty sequence")
    if mask.shape[0] < n:
        raise ValueError("mask shorter than sequence")
    cand = np.arange(n, dtype=np.int64)
    t = 0
    while cand.shape[0] > 1:
        pos = cand + t
        alive = pos < n
        if not alive.all():
            cand = cand[alive]
            if cand.shape[0] == 1:
                break
            pos = cand + t
        sym = bits[pos] ^ mask[t]
        cand = cand[sym == sym.min()]
        t += 1
    return int(cand[0]) + 1


def first_suffix_batch(bits: np.ndarray, masks: np.ndarray) -> np.ndarray:
    n = bits.shape[0]
    if n == 0:
        raise ValueError("empty sequence")
    if masks.shape[1] < n:
        raise ValueError("masks shorter than sequence")
    return np.array([first_suffix(bits, masks[j]) for j in range(masks.shape[0])], dtype=np.int64)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _S30)
    z = z * _M1
    z = z ^ (z >> _S27)
    z = z * _M2
    return z ^ (z >> _S31)


def pack_kmers(bits: np.ndarray, k: int) -> np.ndarray:
    n = bits.shape[0]
    if k < 1 or k > 64:
        raise ValueError("k must be in [1, 64]")
    if k > n:
        raise ValueError("k exceeds the sequence length")
    m = n - k + 1
    acc = np.zeros(m, dtype=np.uint64)
    one = np.uint64(1)
    for j in range(k):
        acc = (acc << one) | bits[j : j + m].astype(np.uint64)
    return acc


def min_kmer_hashes(kmers: np.ndarray, keys: np.ndarray) -> np.ndarray:
    if kmers.shape[0] == 0:
        raise ValueError("no k-mers to hash")
    out = np.empty(keys.shape[0], dtype=np.uint64)
    for j in range(keys.shape[0]):
        out[j] = _mix64(kmers ^ keys[j]).min()
    return out
