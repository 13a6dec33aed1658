"""Benchmark the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_backends.py [--n N] [--masks U] [--repeats R]

Times the two hot kernels (first-suffix selection and k-mer min-hashing)
on identical inputs under both backends and cross-checks the outputs.
"""

import argparse
import time

import numpy as np

from locsketch import _kernels_py
from locsketch import rng

try:
    from locsketch import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2**14, help="sequence length")
    parser.add_argument("--masks", type=int, default=64, help="orderings per selection batch")
    parser.add_argument("--hashes", type=int, default=48, help="hash functions for min-hashing")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    bits = rng.random_bits(rng.substream(1, rng.SOURCE_BITS), args.n)
    masks = np.vstack(
        [rng.random_bits(rng.substream(2, rng.ORDERING_BITS, j), args.n) for j in range(args.masks)]
    )
    kmers = _kernels_py.pack_kmers(bits, 42)
    keys = rng.random_u64(rng.substream(3, rng.FINGERPRINT_KEYS), args.hashes)

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.insert(0, ("c", _kernels))
    else:
        print("compiled extension not available; timing the fallback only")

    print(f"n={args.n} masks={args.masks} hashes={args.hashes} (best of {args.repeats})")
    results = {}
    for name, mod in backends:
        t_sel, out_sel = _time(lambda m=mod: m.first_suffix_batch(bits, masks), args.repeats)
        t_pack, out_pack = _time(lambda m=mod: m.pack_kmers(bits, 42), args.repeats)
        t_mh, out_mh = _time(lambda m=mod: m.min_kmer_hashes(kmers, keys), args.repeats)
        results[name] = (out_sel, out_pack, out_mh)
        print(f"  {name:7s} first_suffix_batch {t_sel * 1e3:8.2f} ms   "
              f"pack_kmers {t_pack * 1e3:7.2f} ms   min_kmer_hashes {t_mh * 1e3:7.2f} ms")

    if len(results) == 2:
        agree = all(
            np.array_equal(a, b) for a, b in zip(results["c"], results["python"])
        )
        print(f"  outputs identical across backends: {agree}")


if __name__ == "__main__":
    main()
