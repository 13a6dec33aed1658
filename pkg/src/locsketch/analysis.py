"""Distortion bound curves, Monte Carlo harness, and empirical verifiers.

Everything here is seeded and deterministic: identical configs (including
the master seed) produce byte-identical summaries regardless of thread
count, because per-trial randomness comes from counter-indexed substreams
and aggregation always runs in trial order.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import ceil, exp, log2, sqrt

import numpy as np

from . import _backend, rng
from .decode import DecodeParams, estimate_overlap
from .minhash import MinHashParams, minhash_estimate, minhash_sketch
from .model import NoiseSpec, alpha_of_theta, apply_bsc, generate_pair
from .sketch import SketchParams, make_sketch, truncate

__all__ = [
    "bound_upper_uv",
    "bound_theorem",
    "bound_theorem_noisy",
    "bound_lower",
    "theorem_params",
    "ExperimentConfig",
    "ExperimentRecord",
    "run_distortion_mc",
    "verify_lemma_pmf",
    "verify_repeat_bound",
    "verify_bins",
    "sweep_rate_distortion",
    "in_quantization_window",
    "quantization_window",
    "has_repeat",
    "paired_worst_mse_confidence",
]


# ---------------------------------------------------------------------------
# analytic bound curves


def bound_upper_uv(u: int, v: int, alpha0: float, variant: str = "result") -> float:
    """Distortion upper bound for a (u, v) sketch at minimum overlap
    parameter ``alpha0``, clamped to [0, 1].

    ``variant="result"``:  2^{-2(v-1)} + (u+1) exp(-2u (alpha0/12 - 2^{-(v-1)})^2)
    ``variant="proof"``:   2^{-2(v-1)} + 2     exp(-2u (alpha0/12 - u 2^{-(v-1)})^2)

    Each variant is vacuous (returns 1) unless its exponent argument is
    positive. Both forms are exposed because the source analysis states
    them in slightly different strengths; neither is authoritative here.
    """
    if u < 1 or v < 1:
        raise ValueError("u and v must be positive")
    if not 0.0 < alpha0 <= 1.0:
        raise ValueError(f"alpha0 must be in (0,1], got {alpha0}")
    quant = 2.0 ** (-2 * (v - 1))
    step = 2.0 ** (-(v - 1))
    if variant == "result":
        gap = alpha0 / 12.0 - step
        if gap <= 0.0:
            return 1.0
        value = quant + (u + 1) * exp(-2.0 * u * gap * gap)
    elif variant == "proof":
        gap = alpha0 / 12.0 - u * step
        if gap <= 0.0:
            return 1.0
        value = quant + 2.0 * exp(-2.0 * u * gap * gap)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return min(1.0, value)


def bound_theorem(B: float, alpha0: float) -> float:
    """Closed-form distortion upper bound 3 exp(-sqrt(B) alpha0 / 24),
    clamped to [0, 1]."""
    if B <= 0:
        raise ValueError(f"B must be positive, got {B}")
    if not 0.0 < alpha0 <= 1.0:
        raise ValueError(f"alpha0 must be in (0,1], got {alpha0}")
    return min(1.0, 3.0 * exp(-sqrt(B) * alpha0 / 24.0))


def bound_theorem_noisy(B: float, alpha0: float, beta: float) -> float:
    """Noisy-channel version: ``alpha0`` is damped by e^{-6 beta}."""
    if beta < 0.0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    return bound_theorem(B, alpha0 * exp(-6.0 * beta))


def bound_lower(B: float, theta0: float) -> float:
    """Converse lower bound on distortion: (1 - theta0) * 2^{-8B}."""
    if B < 0:
        raise ValueError(f"B must be nonnegative, got {B}")
    if not 0.0 <= theta0 <= 1.0:
        raise ValueError(f"theta0 must be in [0,1], got {theta0}")
    return (1.0 - theta0) * 2.0 ** (-8.0 * B)


def theorem_params(B: int, alpha0: float) -> tuple[int, int] | None:
    """Split a bit budget B into (u, v) following v ~ alpha0 sqrt(B)/24.

    The asymptotic rule yields v < 1 for desk-scale budgets, so v is
    floored at the smallest value with 2^{-(v-1)} <= alpha0/24. Below
    that, off-target difference bins carry enough mass for the decoder's
    mode to clear its abstention threshold on disjoint sequences, which
    ruins the theta=0 distortion. Returns None when no full entry fits.
    """
    if B < 1:
        raise ValueError(f"B must be positive, got {B}")
    if not 0.0 < alpha0 <= 1.0:
        raise ValueError(f"alpha0 must be in (0,1], got {alpha0}")
    v_rule = round(alpha0 * sqrt(B) / 24.0)
    v_min = 1
    while v_min < 32 and 2.0 ** (-(v_min - 1)) > alpha0 / 24.0:
        v_min += 1
    v = min(32, max(v_rule, v_min))
    u = B // v
    if u < 1:
        return None
    return u, v


# ---------------------------------------------------------------------------
# quantization window (the bins within one coarse step of the true shift)


def in_quantization_window(mode: int, v: int, n: int, shift: int) -> bool:
    """Exact integer test for |mode * 2^-v - shift/n| <= 2^{-(v-1)}."""
    return abs(mode * n - shift * (1 << v)) <= 2 * n


def quantization_window(v: int, n: int, shift: int) -> list[int]:
    """All integer bins passing :func:`in_quantization_window`; at most 5,
    since the window spans 4 bin widths."""
    center = round(shift * (1 << v) / n)
    window = [k for k in range(center - 3, center + 4) if in_quantization_window(k, v, n, shift)]
    assert len(window) <= 5
    return window


# ---------------------------------------------------------------------------
# Monte Carlo distortion harness


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo run: a theta grid, a scheme, and its parameters."""

    n: int
    theta_grid: tuple[float, ...]
    theta0: float
    trials: int
    master_seed: int
    scheme: str = "locational"
    u: int = 0
    v: int = 0
    noise: NoiseSpec = NoiseSpec()
    threshold_fraction: float = 1.0 / 6.0
    mh_hashes: int = 0
    mh_bits: int = 16
    mh_kmer: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if not 0.0 < self.theta0 < 1.0:
            raise ValueError(f"theta0 must be in (0,1), got {self.theta0}")
        if not self.theta_grid:
            raise ValueError("theta_grid must be nonempty")
        for theta in self.theta_grid:
            if theta != 0.0 and not self.theta0 <= theta <= 1.0:
                raise ValueError(
                    f"theta values must be 0 or in [{self.theta0}, 1], got {theta}"
                )
        if self.scheme == "locational":
            if self.u < 1 or not 1 <= self.v <= 32:
                raise ValueError("locational scheme needs u >= 1 and v in [1, 32]")
        elif self.scheme == "minhash":
            if self.mh_hashes < 1:
                raise ValueError("minhash scheme needs mh_hashes >= 1")
        else:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def payload_bits(self) -> int:
        if self.scheme == "locational":
            return self.u * self.v
        return self.mh_hashes * self.mh_bits


@dataclass(frozen=True)
class ExperimentRecord:
    """Outcome of a single trial."""

    theta: float
    theta_actual: float
    theta_hat: float
    squared_error: float
    abstained: bool
    mode_in_window: bool
    mode_value: int | None
    trial_index: int
    trial_seed: int


def _thread_count() -> int:
    raw = os.environ.get("LOCSKETCH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_indexed(fn, args_list):
    """Apply ``fn`` over ``args_list`` preserving order; parallelism is an
    implementation detail with no effect on results."""
    workers = min(_thread_count(), len(args_list))
    if workers <= 1:
        return [fn(*a) for a in args_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda a: fn(*a), args_list))


def _run_trial(cfg: ExperimentConfig, theta_idx: int, trial_idx: int) -> ExperimentRecord:
    theta = cfg.theta_grid[theta_idx]
    trial_seed = rng.derive_seeds(cfg.master_seed, rng.TRIAL_STREAM, theta_idx, trial_idx)[0]
    inst = generate_pair(cfg.n, theta, trial_seed)
    bsc_seed1, bsc_seed2, sketch_seed = rng.derive_seeds(trial_seed, rng.TRIAL_STREAM, count=3)
    x1, x2 = inst.x1, inst.x2
    if cfg.noise.p > 0.0:
        x1 = apply_bsc(x1, cfg.noise.p, bsc_seed1)
        x2 = apply_bsc(x2, cfg.noise.p, bsc_seed2)

    if cfg.scheme == "locational":
        params = SketchParams(n=cfg.n, u=cfg.u, v=cfg.v, seed=sketch_seed)
        result = estimate_overlap(
            make_sketch(x1, params),
            make_sketch(x2, params),
            DecodeParams(
                theta0=cfg.theta0,
                threshold_fraction=cfg.threshold_fraction,
                noise_beta=cfg.noise.beta,
            ),
        )
        theta_hat = result.theta_hat
        abstained = result.abstained
        mode_value = result.mode_value
        mode_in_window = (not abstained) and in_quantization_window(
            mode_value, cfg.v, cfg.n, inst.shift
        )
    else:
        params = MinHashParams(
            n=cfg.n, num_hashes=cfg.mh_hashes, bits=cfg.mh_bits,
            seed=sketch_seed, kmer_len=cfg.mh_kmer,
        )
        theta_hat = minhash_estimate(minhash_sketch(x1, params), minhash_sketch(x2, params))
        abstained = False
        mode_value = None
        mode_in_window = False

    err = inst.theta_actual - theta_hat
    return ExperimentRecord(
        theta=theta,
        theta_actual=inst.theta_actual,
        theta_hat=theta_hat,
        squared_error=err * err,
        abstained=abstained,
        mode_in_window=mode_in_window,
        mode_value=mode_value,
        trial_index=trial_idx,
        trial_seed=trial_seed,
    )


def run_distortion_mc(cfg: ExperimentConfig) -> tuple[list[dict], list[ExperimentRecord]]:
    """Run the configured trials; return per-theta summaries plus every
    raw trial record (theta-major, trial-minor order)."""
    jobs = [
        (cfg, ti, t) for ti in range(len(cfg.theta_grid)) for t in range(cfg.trials)
    ]
    records = _map_indexed(_run_trial, jobs)
    summaries = []
    for ti, theta in enumerate(cfg.theta_grid):
        block = records[ti * cfg.trials : (ti + 1) * cfg.trials]
        summaries.append(
            {
                "theta": theta,
                "theta_actual": block[0].theta_actual,
                "trials": cfg.trials,
                "mse": sum(r.squared_error for r in block) / cfg.trials,
                "abstention_rate": sum(r.abstained for r in block) / cfg.trials,
                "mode_in_window_rate": sum(r.mode_in_window for r in block) / cfg.trials,
            }
        )
    return summaries, records


# ---------------------------------------------------------------------------
# empirical verifiers


def verify_lemma_pmf(n: int, theta: float, v: int, trials: int, seed: int) -> dict:
    """Empirical pmf of the single-ordering sketch difference.

    Each trial draws a fresh instance and one fresh mask, then records
    the integer difference of the two truncated first-suffix positions.
    Reports the total mass on the quantization window around the true
    shift and the largest single bin outside it.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    counts: dict[int, int] = {}
    shift = None
    theta_actual = None
    for t in range(trials):
        trial_seed = rng.derive_seeds(seed, rng.TRIAL_STREAM, 0, t)[0]
        inst = generate_pair(n, theta, trial_seed)
        shift = inst.shift
        theta_actual = inst.theta_actual
        mask_seed = rng.derive_seeds(trial_seed, rng.TRIAL_STREAM, count=3)[2]
        mask = rng.random_bits(rng.substream(mask_seed, rng.ORDERING_BITS, 0), n)
        m1 = int(_backend.first_suffix(inst.x1, mask))
        m2 = int(_backend.first_suffix(inst.x2, mask))
        d = truncate(m1, n, v) - truncate(m2, n, v)
        counts[d] = counts.get(d, 0) + 1

    window = quantization_window(v, n, shift)
    pmf = {k: c / trials for k, c in sorted(counts.items())}
    in_mass = sum(pmf.get(k, 0.0) for k in window)
    off = [p for k, p in pmf.items() if k not in window]
    return {
        "n": n,
        "theta": theta,
        "theta_actual": theta_actual,
        "shift": shift,
        "v": v,
        "trials": trials,
        "alpha": alpha_of_theta(theta_actual),
        "window": window,
        "in_window_mass": in_mass,
        "max_off_window": max(off, default=0.0),
        "pmf": pmf,
    }


def has_repeat(bits: np.ndarray, k: int) -> bool:
    """True iff some length-k window of ``bits`` occurs at two distinct
    positions. Exact: windows are packed injectively into uint64."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[0]
    if k > n:
        return False
    if k > 64:
        raise ValueError("repeat check supports k up to 64")
    packed = np.sort(_backend.pack_kmers(bits, k))
    return bool(np.any(packed[1:] == packed[:-1]))


def verify_repeat_bound(n: int, trials: int, seed: int, k: int | None = None) -> dict:
    """Empirical probability that an i.i.d. length-n sequence contains a
    repeated length-k window, with k defaulting to ceil(3*log2 n) so the
    analytic union bound evaluates to 1/n."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if k is None:
        k = ceil(3 * log2(n))
    repeats = 0
    chunk = max(1, min(trials, (1 << 24) // max(1, n)))
    done = 0
    while done < trials:
        count = min(chunk, trials - done)
        block = np.empty((count, n), dtype=np.uint8)
        for i in range(count):
            trial_seed = rng.derive_seeds(seed, rng.TRIAL_STREAM, 0, done + i)[0]
            block[i] = rng.random_bits(rng.substream(trial_seed, rng.SOURCE_BITS), n)
        if k <= n:
            m = n - k + 1
            packed = np.zeros((count, m), dtype=np.uint64)
            one = np.uint64(1)
            for j in range(k):
                packed = (packed << one) | block[:, j : j + m].astype(np.uint64)
            packed.sort(axis=1)
            repeats += int(np.sum(np.any(packed[:, 1:] == packed[:, :-1], axis=1)))
        done += count
    frequency = repeats / trials
    bound = 1.0 / n
    sigma = sqrt(bound * (1.0 - bound) / trials)
    return {
        "n": n,
        "k": k,
        "trials": trials,
        "repeats": repeats,
        "frequency": frequency,
        "bound": bound,
        "mc_sigma": sigma,
        "pass": frequency <= bound + 3.0 * sigma,
    }


def verify_bins(u: int, v: int, n: int, theta0: float, trials: int, seed: int) -> dict:
    """Tail of F, the maximum multiplicity in the difference multiset of
    two sketches of disjoint (theta = 0) sequences.

    Reports the empirical frequency of F >= alpha0*u/12 against the two
    stated Hoeffding-style bounds. A configuration where either bound's
    validity condition fails is flagged, not rejected. Note F >= 1 always
    holds, so a threshold below 1 makes the tail frequency identically 1.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    alpha0 = alpha_of_theta(theta0)
    threshold = alpha0 * u / 12.0

    def one_trial(trial_idx: int) -> int:
        trial_seed = rng.derive_seeds(seed, rng.TRIAL_STREAM, 0, trial_idx)[0]
        inst = generate_pair(n, 0.0, trial_seed)
        sketch_seed = rng.derive_seeds(trial_seed, rng.TRIAL_STREAM, count=3)[2]
        params = SketchParams(n=n, u=u, v=v, seed=sketch_seed)
        d = make_sketch(inst.x1, params).entries.astype(np.int64) - make_sketch(
            inst.x2, params
        ).entries.astype(np.int64)
        _, counts = np.unique(d, return_counts=True)
        return int(counts.max())

    f_values = _map_indexed(one_trial, [(t,) for t in range(trials)])
    tail = sum(f >= threshold for f in f_values) / trials
    hist: dict[int, int] = {}
    for f in f_values:
        hist[f] = hist.get(f, 0) + 1

    step = 2.0 ** (-(v - 1))
    gap_main = alpha0 / 12.0 - u * step
    gap_appendix = alpha0 / 12.0 - u * step / 2.0  # u * 2^-v
    bound_main = exp(-2.0 * u * gap_main * gap_main) if gap_main > 0.0 else 1.0
    bound_appendix = exp(-2.0 * u * gap_appendix * gap_appendix) if gap_appendix > 0.0 else 1.0
    sigma = sqrt(bound_main * (1.0 - bound_main) / trials)
    return {
        "u": u,
        "v": v,
        "n": n,
        "theta0": theta0,
        "alpha0": alpha0,
        "trials": trials,
        "threshold": threshold,
        "tail_frequency": tail,
        "bound": bound_main,
        "bound_valid": gap_main > 0.0,
        "bound_appendix_variant": bound_appendix,
        "bound_appendix_variant_valid": gap_appendix > 0.0,
        "mc_sigma": sigma,
        "pass": tail <= bound_main + 3.0 * sigma,
        "f_histogram": dict(sorted(hist.items())),
    }


# ---------------------------------------------------------------------------
# rate-distortion sweep


def default_theta_grid(theta0: float, step: float = 0.05) -> tuple[float, ...]:
    """{0} followed by theta0, theta0+step, ..., 1."""
    grid = [0.0]
    t = theta0
    while t < 1.0 - 1e-9:
        grid.append(round(t, 10))
        t += step
    grid.append(1.0)
    return tuple(grid)


def sweep_rate_distortion(
    B_grid,
    theta0: float,
    n: int,
    trials: int,
    seed: int,
    schemes=("locational", "minhash"),
    theta_grid=None,
    mh_bits: int = 16,
) -> dict:
    """Head-to-head distortion of both schemes across a bit-budget grid.

    Locational parameters follow :func:`theorem_params`; the baseline
    gets H = B // mh_bits fingerprints. Budgets too small for one full
    entry are skipped with a warning row. Returns {"rows", "skipped"};
    one row per (scheme, B, theta) plus the group's worst-case MSE.
    """
    alpha0 = alpha_of_theta(theta0)
    if theta_grid is None:
        theta_grid = default_theta_grid(theta0)
    rows: list[dict] = []
    skipped: list[dict] = []
    for B in B_grid:
        for scheme in schemes:
            if scheme == "locational":
                uv = theorem_params(B, alpha0)
                if uv is None:
                    skipped.append({"scheme": scheme, "B": B, "reason": "budget below one entry"})
                    continue
                u, v = uv
                cfg = ExperimentConfig(
                    n=n, theta_grid=tuple(theta_grid), theta0=theta0, trials=trials,
                    master_seed=seed, scheme="locational", u=u, v=v,
                )
                layout = {"u": u, "v": v, "H": "", "b": ""}
            elif scheme == "minhash":
                H = B // mh_bits
                if H < 1:
                    skipped.append({"scheme": scheme, "B": B, "reason": "budget below one fingerprint"})
                    continue
                cfg = ExperimentConfig(
                    n=n, theta_grid=tuple(theta_grid), theta0=theta0, trials=trials,
                    master_seed=seed, scheme="minhash", mh_hashes=H, mh_bits=mh_bits,
                )
                layout = {"u": "", "v": "", "H": H, "b": mh_bits}
            else:
                raise ValueError(f"unknown scheme {scheme!r}")
            summaries, _ = run_distortion_mc(cfg)
            worst = max(s["mse"] for s in summaries)
            for s in summaries:
                rows.append(
                    {
                        "scheme": scheme,
                        "B": B,
                        "n": n,
                        **layout,
                        "theta": s["theta"],
                        "theta_actual": s["theta_actual"],
                        "trials": trials,
                        "mse": s["mse"],
                        "abstention_rate": s["abstention_rate"],
                        "mode_in_window_rate": s["mode_in_window_rate"],
                        "worst_case_mse": worst,
                    }
                )
    return {"rows": rows, "skipped": skipped}


def paired_worst_mse_confidence(
    records_a: list[ExperimentRecord],
    records_b: list[ExperimentRecord],
    n_boot: int,
    seed: int,
) -> float:
    """Bootstrap confidence that scheme A's worst-case MSE over the theta
    grid is below scheme B's, resampling trial indices jointly so paired
    trials stay paired."""
    se_a = _se_matrix(records_a)
    se_b = _se_matrix(records_b)
    if se_a.shape != se_b.shape:
        raise ValueError("record sets are not paired")
    trials = se_a.shape[1]
    gen = rng.substream(seed, rng.BOOTSTRAP)
    wins = 0
    for _ in range(n_boot):
        idx = gen.integers(0, trials, size=trials)
        if se_a[:, idx].mean(axis=1).max() < se_b[:, idx].mean(axis=1).max():
            wins += 1
    return wins / n_boot


def _se_matrix(records: list[ExperimentRecord]) -> np.ndarray:
    thetas = sorted({r.theta for r in records})
    by_theta = {t: [] for t in thetas}
    for r in records:
        by_theta[r.theta].append(r.squared_error)
    trials = len(by_theta[thetas[0]])
    if any(len(v) != trials for v in by_theta.values()):
        raise ValueError("unbalanced records")
    return np.array([by_theta[t] for t in thetas], dtype=np.float64)
