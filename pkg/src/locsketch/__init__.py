"""Sketching of long binary sequences for pairwise overlap estimation.

Sequences are compressed into small fixed-size sketches recording where,
under randomized lexicographic orders, each sequence's first suffix
starts; the overlap fraction between two sequences is then estimated from
the sketches alone. A min-hash baseline and a Monte Carlo harness for
checking the scheme's distortion behavior are included.
"""

from ._backend import BACKEND
from .analysis import (
    ExperimentConfig,
    ExperimentRecord,
    bound_lower,
    bound_theorem,
    bound_theorem_noisy,
    bound_upper_uv,
    run_distortion_mc,
    sweep_rate_distortion,
    theorem_params,
    verify_bins,
    verify_lemma_pmf,
    verify_repeat_bound,
)
from .decode import DecodeParams, DecodeResult, diff_multiset, estimate_overlap, mode_with_ties
from .errors import (
    IncompatibleSketchError,
    LocsketchError,
    SequenceFormatError,
    SketchFormatError,
)
from .lexorder import OrderingSet, compare_suffixes, first_suffix_position, make_orderings
from .minhash import MinHashParams, MinHashSketch, minhash_estimate, minhash_sketch
from .model import (
    NoiseSpec,
    OverlapInstance,
    alpha_of_theta,
    alpha_tilde,
    apply_bsc,
    generate_pair,
    theta_of_alpha,
)
from .sketch import LocationalSketch, SketchParams, make_sketch, truncate

__version__ = "0.1.0"
