"""Kernel backend selection and compiled/fallback equivalence."""

import os
import subprocess
import sys

import numpy as np
import pytest

from locsketch import _backend, _kernels_py

try:
    from locsketch import _kernels
except ImportError:
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled kernels not built")


def test_some_backend_selected():
    assert _backend.BACKEND in ("c", "python")


@needs_ext
def test_first_suffix_equivalence(np_rng):
    for _ in range(300):
        n = int(np_rng.integers(1, 400))
        bits = np_rng.integers(0, 2, n).astype(np.uint8)
        mask = np_rng.integers(0, 2, n).astype(np.uint8)
        assert _kernels.first_suffix(bits, mask) == _kernels_py.first_suffix(bits, mask)


@needs_ext
def test_batch_equivalence(np_rng):
    bits = np_rng.integers(0, 2, 2000).astype(np.uint8)
    masks = np_rng.integers(0, 2, (24, 2000)).astype(np.uint8)
    assert np.array_equal(
        _kernels.first_suffix_batch(bits, masks),
        _kernels_py.first_suffix_batch(bits, masks),
    )


@needs_ext
def test_kmer_kernels_equivalence(np_rng):
    for k in [1, 2, 13, 31, 63, 64]:
        bits = np_rng.integers(0, 2, 500).astype(np.uint8)
        a = _kernels.pack_kmers(bits, k)
        b = _kernels_py.pack_kmers(bits, k)
        assert np.array_equal(a, b)
        keys = np_rng.integers(0, 2**63, 17, dtype=np.uint64)
        assert np.array_equal(
            _kernels.min_kmer_hashes(a, keys), _kernels_py.min_kmer_hashes(b, keys)
        )


@needs_ext
def test_degenerate_inputs_agree():
    one = np.array([1], dtype=np.uint8)
    assert _kernels.first_suffix(one, one) == _kernels_py.first_suffix(one, one) == 1
    zeros = np.zeros(300, dtype=np.uint8)
    assert _kernels.first_suffix(zeros, zeros) == _kernels_py.first_suffix(zeros, zeros) == 1
    for mod in (_kernels, _kernels_py):
        with pytest.raises(ValueError):
            mod.first_suffix(np.zeros(0, dtype=np.uint8), zeros)
        with pytest.raises(ValueError):
            mod.pack_kmers(zeros, 65)


def test_env_var_forces_python_backend():
    env = dict(os.environ, LOCSKETCH_BACKEND="py")
    out = subprocess.run(
        [sys.executable, "-c", "import locsketch; print(locsketch.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"


def test_env_var_rejects_unknown_backend():
    env = dict(os.environ, LOCSKETCH_BACKEND="fortran")
    out = subprocess.run(
        [sys.executable, "-c", "import locsketch"],
        env=env,
        capture_output=True,
        text=True,
    )
    assert out.returncode != 0


@needs_ext
def test_pipeline_identical_across_backends():
    script = (
        "import locsketch as ls\n"
        "inst = ls.generate_pair(2048, 0.7, rng_seed=5)\n"
        "p = ls.SketchParams(n=2048, u=16, v=10, seed=3)\n"
        "import locsketch.sketch as sk\n"
        "print(sk.serialize(ls.make_sketch(inst.x1, p)).hex())\n"
    )
    outs = []
    for backend in ("c", "py"):
        env = dict(os.environ, LOCSKETCH_BACKEND=backend)
        res = subprocess.run(
            [sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True
        )
        outs.append(res.stdout)
    assert outs[0] == outs[1]
