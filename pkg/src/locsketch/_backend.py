"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
fallback is used. ``LOCSKETCH_BACKEND=c`` demands the extension (raising
if it is missing), ``LOCSKETCH_BACKEND=py`` forces the fallback.
"""

import os

_requested = os.environ.get("LOCSKETCH_BACKEND", "").strip().lower()
if _requested not in ("", "c", "py"):
    raise ImportError(f"LOCSKETCH_BACKEND must be 'c' or 'py', got {_requested!r}")

_impl = None
if _requested in ("", "c"):
    try:
        from . import _kernels as _impl
    except ImportError:
        if _requested == "c":
            raise
        _impl = None
if _impl is None:
    from . import _kernels_py as _impl

BACKEND = _impl.BACKEND_NAME
first_suffix = _impl.first_suffix
first_suffix_batch = _impl.first_suffix_batch
pack_kmers = _impl.pack_kmers
min_kmer_hashes = _impl.min_kmer_hashes
