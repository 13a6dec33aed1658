# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops: masked first-suffix selection and k-mer min-hashing.

Must stay behaviorally identical to the numpy implementations in
``_kernels_py``; ``tests/test_backends.py`` enforces the equivalence.
"""

from libc.stdint cimport int64_t, uint8_t, uint64_t

import numpy as np

BACKEND_NAME = "c"


cdef Py_ssize_t _scan_first_suffix(const uint8_t* bits, const uint8_t* mask,
                                   Py_ssize_t n) noexcept nogil:
    # Left-to-right scan keeping the current minimum. Two suffixes first
    # differ either at a raw-bit mismatch (the mask decides the winner
    # there) or at the shorter one's terminator, which orders above both
    # symbols, so the longer suffix wins. The candidate i is always the
    # shorter one, hence it can never win at the terminator.
    cdef Py_ssize_t best = 0, i, t, length
    for i in range(1, n):
        length = n - i
        t = 0
        while t < length and bits[i + t] == bits[best + t]:
            t += 1
        if t < length and (bits[i + t] ^ mask[t]) < (bits[best + t] ^ mask[t]):
            best = i
    return best + 1


def first_suffix(const uint8_t[::1] bits, const uint8_t[::1] mask):
    """1-based position of the lexicographically first masked suffix."""
    cdef Py_ssize_t n = bits.shape[0]
    if n == 0:
        raise ValueError("empty sequence")
    if mask.shape[0] < n:
        raise ValueError("mask shorter than sequence")
    cdef Py_ssize_t result
    with nogil:
        result = _scan_first_suffix(&bits[0], &mask[0], n)
    return result


def first_suffix_batch(const uint8_t[::1] bits, const uint8_t[:, ::1] masks):
    """First-suffix positions for one sequence under a stack of masks."""
    cdef Py_ssize_t n = bits.shape[0]
    cdef Py_ssize_t u = masks.shape[0]
    if n == 0:
        raise ValueError("empty sequence")
    if masks.shape[1] < n:
        raise ValueError("masks shorter than sequence")
    out = np.empty(u, dtype=np.int64)
    cdef int64_t[::1] view = out
    cdef Py_ssize_t j
    with nogil:
        for j in range(u):
            view[j] = _scan_first_suffix(&bits[0], &masks[j, 0], n)
    return out


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    # splitmix64 finalizer
    z ^= z >> 30
    z *= <uint64_t>0xBF58476D1CE4E5B9
    z ^= z >> 27
    z *= <uint64_t>0x94D049BB133111EB
    z ^= z >> 31
    return z


def pack_kmers(const uint8_t[::1] bits, Py_ssize_t k):
    """Pack every length-k window into a uint64, MSB-first within the window."""
    cdef Py_ssize_t n = bits.shape[0]
    if k < 1 or k > 64:
        raise ValueError("k must be in [1, 64]")
    if k > n:
        raise ValueError("k exceeds the sequence length")
    cdef Py_ssize_t m = n - k + 1
    out = np.empty(m, dtype=np.uint64)
    cdef uint64_t[::1] view = out
    cdef uint64_t keep = <uint64_t>0xFFFFFFFFFFFFFFFF if k == 64 else ((<uint64_t>1 << k) - 1)
    cdef uint64_t cur = 0
    cdef Py_ssize_t i
    with nogil:
        for i in range(k):
            cur = (cur << 1) | bits[i]
        view[0] = cur
        for i in range(1, m):
            cur = ((cur << 1) | bits[i + k - 1]) & keep
            view[i] = cur
    return out


def min_kmer_hashes(const uint64_t[::1] kmers, const uint64_t[::1] keys):
    """Per key, the minimum of mix64(kmer ^ key) over all packed k-mers."""
    cdef Py_ssize_t m = kmers.shape[0]
    cdef Py_ssize_t h = keys.shape[0]
    if m == 0:
        raise ValueError("no k-mers to hash")
    out = np.empty(h, dtype=np.uint64)
    cdef uint64_t[::1] view = out
    cdef Py_ssize_t i, j
    cdef uint64_t best, val, key
    with nogil:
        for j in range(h):
            key = keys[j]
            best = _mix64(kmers[0] ^ key)
            for i in range(1, m):
                val = _mix64(kmers[i] ^ key)
                if val < best:
                    best = val
            view[j] = best
    return out
