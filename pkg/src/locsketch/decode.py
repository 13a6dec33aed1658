"""Overlap estimation from two location sketches.

The decoder takes entrywise differences of the two sketches, finds the
mode of that multiset, and outputs ``1 - mode * 2^-v``. It abstains
(outputs 0) when the mode is too rare to be trusted or is negative: a
negative difference cannot arise from a genuine suffix-prefix overlap in
the assumed direction.
"""

from dataclasses import dataclass
from math import exp

import numpy as np

from .errors import IncompatibleSketchError
from .model import alpha_of_theta
from .sketch import LocationalSketch

__all__ = ["DecodeParams", "DecodeResult", "diff_multiset", "mode_with_ties", "estimate_overlap"]


@dataclass(frozen=True)
class DecodeParams:
    """Abstention policy for the mode decoder.

    ``theta0`` is the smallest overlap the decoder is asked to detect;
    the mode must appear at least ``threshold_fraction * alpha0 * u``
    times, where ``alpha0 = theta0 / (2 - theta0)``. A positive
    ``noise_beta`` rescales ``alpha0`` by ``e^{-6 beta}`` to account for
    channel noise thinning the usable suffixes.
    """

    theta0: float
    threshold_fraction: float = 1.0 / 6.0
    noise_beta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.theta0 < 1.0:
            raise ValueError(f"theta0 must be in (0,1), got {self.theta0}")
        if self.threshold_fraction <= 0.0:
            raise ValueError(f"threshold_fraction must be positive, got {self.threshold_fraction}")
        if self.noise_beta < 0.0:
            raise ValueError(f"noise_beta must be nonnegative, got {self.noise_beta}")

    @property
    def alpha0(self) -> float:
        return alpha_of_theta(self.theta0)

    @property
    def alpha0_effective(self) -> float:
        return self.alpha0 * exp(-6.0 * self.noise_beta)

    def threshold(self, u: int) -> float:
        """Minimum mode count (a real number, compared strictly)."""
        return self.threshold_fraction * self.alpha0_effective * u


@dataclass(frozen=True)
class DecodeResult:
    theta_hat: float
    mode_value: int
    mode_count: int
    abstained: bool


def diff_multiset(s1: LocationalSketch, s2: LocationalSketch) -> np.ndarray:
    """Entrywise differences ``s1 - s2`` as signed integers in
    ``[-(2^v - 1), 2^v - 1]``. Sketch parameters must match exactly."""
    for field in ("n", "u", "v", "seed"):
        a, b = getattr(s1.params, field), getattr(s2.params, field)
        if a != b:
            raise IncompatibleSketchError(
                f"sketches disagree on {field}: {a} != {b}", field=field
            )
    return s1.entries.astype(np.int64) - s2.entries.astype(np.int64)


def mode_with_ties(d) -> tuple[int, int]:
    """Most frequent value and its count; ties go to the numerically
    smallest value."""
    d = np.asarray(d)
    if d.size == 0:
        raise ValueError("empty multiset has no mode")
    values, counts = np.unique(d, return_counts=True)
    # values are sorted ascending, argmax picks the first maximum
    best = int(np.argmax(counts))
    return int(values[best]), int(counts[best])


def estimate_overlap(s1: LocationalSketch, s2: LocationalSketch, params: DecodeParams) -> DecodeResult:
    """Mode-decode the overlap fraction from two compatible sketches."""
    d = diff_multiset(s1, s2)
    mode_value, mode_count = mode_with_ties(d)
    u = s1.params.u
    v = s1.params.v
    if mode_count < params.threshold(u) or mode_value < 0:
        return DecodeResult(
            theta_hat=0.0, mode_value=mode_value, mode_count=mode_count, abstained=True
        )
    theta_hat = 1.0 - mode_value * 2.0**-v
    return DecodeResult(
        theta_hat=theta_hat, mode_value=mode_value, mode_count=mode_count, abstained=False
    )
