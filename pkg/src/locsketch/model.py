"""Source model: binary sequences with a planted suffix-prefix overlap.

A pair ``(x1, x2)`` of length-``n`` sequences is generated by drawing one
i.i.d. uniform parent sequence ``x`` of length ``n + s`` and taking
``x1 = x[0:n]`` and ``x2 = x[s:s+n]``. The overlap fraction is
``theta = 1 - s/n``: the last ``n - s`` symbols of ``x1`` equal the first
``n - s`` symbols of ``x2``. An optional binary symmetric channel flips
each bit independently with probability ``p``.
"""

from dataclasses import dataclass
from math import exp, floor, log2

import numpy as np

from . import rng
from .errors import SequenceFormatError

__all__ = [
    "OverlapInstance",
    "NoiseSpec",
    "generate_pair",
    "apply_bsc",
    "alpha_of_theta",
    "theta_of_alpha",
    "alpha_tilde",
    "as_bits",
    "parse_bits",
    "format_bits",
    "read_bits_file",
    "write_bits_file",
]


def as_bits(seq) -> np.ndarray:
    """Coerce a sequence of 0/1 values (or a '0101' string) to uint8 bits."""
    if isinstance(seq, str):
        return parse_bits(seq)
    bits = np.asarray(seq, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError("bit sequence must be one-dimensional")
    if bits.size == 0:
        raise ValueError("bit sequence must be nonempty")
    if not np.all(bits <= 1):
        raise ValueError("bit sequence entries must be 0 or 1")
    return bits


def parse_bits(text: str) -> np.ndarray:
    """Parse one line of '0'/'1' characters; a single trailing newline is
    allowed. Rejects anything else, reporting the first bad offset."""
    if text.endswith("\n"):
        text = text[:-1]
    if not text:
        raise SequenceFormatError("empty sequence", offset=0)
    arr = np.frombuffer(text.encode("ascii", errors="replace"), dtype=np.uint8)
    bad = np.nonzero((arr != ord("0")) & (arr != ord("1")))[0]
    if bad.size:
        off = int(bad[0])
        raise SequenceFormatError(
            f"invalid character {text[off]!r} at offset {off} (expected '0' or '1')",
            offset=off,
        )
    return (arr - ord("0")).astype(np.uint8)


def format_bits(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits))


def read_bits_file(path) -> np.ndarray:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        return parse_bits(fh.read())


def write_bits_file(path, bits: np.ndarray) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_bits(bits) + "\n")


@dataclass(frozen=True, eq=False)
class OverlapInstance:
    """A parent sequence and the two overlapping views extracted from it.

    ``shift`` is the offset of ``x2`` inside ``x``; ``theta_actual`` is
    the realized overlap ``1 - shift/n`` after integer rounding.
    """

    x: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    shift: int
    theta_actual: float

    @property
    def n(self) -> int:
        return self.x1.shape[0]


@dataclass(frozen=True)
class NoiseSpec:
    """Binary symmetric channel parameters.

    ``beta`` records the noise scale when ``p`` was derived as
    ``beta / log2(n)``; it only affects the decoder's abstention
    threshold, never the channel itself.
    """

    p: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"crossover probability must be in [0,1], got {self.p}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")

    @classmethod
    def from_beta(cls, beta: float, n: int) -> "NoiseSpec":
        """Noise level p = beta / log2(n) for block length ``n``."""
        if n < 2:
            raise ValueError("n must be at least 2")
        return cls(p=beta / log2(n), beta=beta)


def generate_pair(n: int, theta: float, rng_seed: int) -> OverlapInstance:
    """Draw an overlap instance with planted overlap ``theta``.

    The shift is ``s = round((1 - theta) * n)`` (ties round up), so the
    realized overlap ``theta_actual = 1 - s/n`` may differ from ``theta``
    by up to ``1/(2n)``; downstream error is always measured against
    ``theta_actual``. Deterministic in ``(n, theta, rng_seed)``.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0,1], got {theta}")
    shift = int(floor((1.0 - theta) * n + 0.5))
    shift = min(max(shift, 0), n)
    gen = rng.substream(rng_seed, rng.SOURCE_BITS)
    x = rng.random_bits(gen, n + shift)
    x.setflags(write=False)
    x1 = x[:n]
    x2 = x[shift : shift + n]
    return OverlapInstance(x=x, x1=x1, x2=x2, shift=shift, theta_actual=1.0 - shift / n)


def apply_bsc(x: np.ndarray, p: float, rng_seed: int) -> np.ndarray:
    """Flip each bit of ``x`` independently with probability ``p``.

    Returns a new array; the input is never mutated.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"crossover probability must be in [0,1], got {p}")
    bits = as_bits(x)
    if p == 0.0:
        return bits.copy()
    gen = rng.substream(rng_seed, rng.CHANNEL_FLIPS)
    flips = gen.random(bits.shape[0]) < p
    return bits ^ flips.astype(np.uint8)


def alpha_of_theta(theta: float) -> float:
    """Probability that a uniformly located distinguished suffix of the
    parent sequence falls inside the overlap: theta / (2 - theta)."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0,1], got {theta}")
    return theta / (2.0 - theta)


def theta_of_alpha(alpha: float) -> float:
    """Inverse of :func:`alpha_of_theta`: 2*alpha / (1 + alpha)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    return 2.0 * alpha / (1.0 + alpha)


def alpha_tilde(theta: float, beta: float) -> float:
    """Noise-degraded hit probability theta*e^{-6 beta} / (2 - theta*e^{-6 beta}).

    Equals :func:`alpha_of_theta` at ``beta = 0``.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0,1], got {theta}")
    if beta < 0.0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    damped = theta * exp(-6.0 * beta)
    return damped / (2.0 - damped)
