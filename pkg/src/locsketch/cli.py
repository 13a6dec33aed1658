"""Command-line frontend.

Subcommands: sketch, estimate, allpairs, baseline, simulate, verify,
bounds. Exit codes: 0 on success, 1 on usage errors, 2 on data or format
errors (malformed inputs, incompatible sketches, failed verification).
All commands are byte-reproducible given fixed flags and seeds; output
files are written via a temporary file and renamed, so a failed run never
leaves a partial file.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from . import analysis, minhash, sketch
from ._backend import BACKEND
from .decode import DecodeParams, estimate_overlap
from .errors import LocsketchError
from .minhash import MinHashParams, minhash_estimate, minhash_sketch
from .model import NoiseSpec, read_bits_file
from .sketch import SketchParams, make_sketch

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".locsketch-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return str(int(x)) if x == int(x) and abs(x) < 1e16 else repr(x)
    if x is None:
        return ""
    return str(x)


def _rows_to_csv(header: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(col, "")) for col in header])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        _atomic_write(out, text.encode("ascii"))
    else:
        sys.stdout.write(text)


def _parse_grid(text: str, cast=float) -> tuple:
    try:
        return tuple(cast(part) for part in text.split(",") if part != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}")


def _info(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sketch(args) -> int:
    bits = read_bits_file(args.infile)
    params = SketchParams(n=bits.shape[0], u=args.u, v=args.v, seed=args.seed)
    sk = make_sketch(bits, params)
    _atomic_write(args.out, sketch.serialize(sk))
    _info(args, f"n={params.n} u={params.u} v={params.v} B={params.payload_bits}")
    return 0


def _cmd_estimate(args) -> int:
    with open(args.sketch_a, "rb") as fh:
        s1 = sketch.deserialize(fh.read())
    with open(args.sketch_b, "rb") as fh:
        s2 = sketch.deserialize(fh.read())
    params = DecodeParams(
        theta0=args.theta0,
        threshold_fraction=args.threshold_fraction,
        noise_beta=args.beta,
    )
    result = estimate_overlap(s1, s2, params)
    if args.json:
        print(
            json.dumps(
                {
                    "theta_hat": result.theta_hat,
                    "mode": result.mode_value,
                    "count": result.mode_count,
                    "abstained": result.abstained,
                }
            )
        )
    else:
        print(_fmt(result.theta_hat))
    return 0


def _cmd_allpairs(args) -> int:
    names = sorted(f for f in os.listdir(args.dir) if f.endswith(".lsk"))
    if len(names) < 2:
        print(f"allpairs: need at least 2 .lsk files in {args.dir}", file=sys.stderr)
        return DATA_ERROR
    sketches = []
    for name in names:
        with open(os.path.join(args.dir, name), "rb") as fh:
            sketches.append(sketch.deserialize(fh.read()))
    reference = sketches[0].params
    offenders = [n for n, s in zip(names, sketches) if s.params != reference]
    if offenders:
        print(
            "allpairs: incompatible sketches: " + ", ".join(offenders), file=sys.stderr
        )
        return DATA_ERROR
    params = DecodeParams(theta0=args.theta0, threshold_fraction=args.threshold_fraction)
    rows = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            forward = estimate_overlap(sketches[i], sketches[j], params).theta_hat
            backward = estimate_overlap(sketches[j], sketches[i], params).theta_hat
            rows.append(
                {"file_a": names[i], "file_b": names[j], "theta_hat": max(forward, backward)}
            )
    _emit(_rows_to_csv(["file_a", "file_b", "theta_hat"], rows), args.out)
    return 0


def _cmd_baseline_sketch(args) -> int:
    bits = read_bits_file(args.infile)
    params = MinHashParams(
        n=bits.shape[0],
        num_hashes=args.hashes,
        bits=args.bits,
        seed=args.seed,
        kmer_len=args.kmer,
    )
    sk = minhash_sketch(bits, params)
    _atomic_write(args.out, minhash.serialize(sk))
    _info(
        args,
        f"n={params.n} H={params.num_hashes} k={params.kmer_len} "
        f"b={params.bits} B={params.payload_bits}",
    )
    return 0


def _cmd_baseline_estimate(args) -> int:
    with open(args.sketch_a, "rb") as fh:
        s1 = minhash.deserialize(fh.read())
    with open(args.sketch_b, "rb") as fh:
        s2 = minhash.deserialize(fh.read())
    theta_hat = minhash_estimate(s1, s2)
    if args.json:
        print(json.dumps({"theta_hat": theta_hat}))
    else:
        print(_fmt(theta_hat))
    return 0


_SIM_HEADER = [
    "scheme", "B", "n", "u", "v", "H", "b", "theta", "theta_actual",
    "trials", "mse", "abstention_rate", "mode_in_window_rate",
]


def _cmd_simulate(args) -> int:
    if args.sweep:
        if not args.B_grid:
            print("simulate: --sweep requires --B-grid", file=sys.stderr)
            return USAGE_ERROR
        result = analysis.sweep_rate_distortion(
            args.B_grid,
            theta0=args.theta0,
            n=args.n,
            trials=args.trials,
            seed=args.seed,
            theta_grid=args.theta_grid,
            mh_bits=args.bits,
        )
        for skip in result["skipped"]:
            _info(args, f"skipped scheme={skip['scheme']} B={skip['B']}: {skip['reason']}")
        header = _SIM_HEADER + ["worst_case_mse"]
        if args.json:
            _emit(json.dumps(result["rows"], indent=2) + "\n", args.out)
        else:
            _emit(_rows_to_csv(header, result["rows"]), args.out)
        return 0

    noise = NoiseSpec.from_beta(args.beta, args.n) if args.beta > 0 else NoiseSpec()
    if args.theta_grid is None:
        args.theta_grid = analysis.default_theta_grid(args.theta0)
    if args.scheme == "locational":
        cfg = analysis.ExperimentConfig(
            n=args.n, theta_grid=args.theta_grid, theta0=args.theta0,
            trials=args.trials, master_seed=args.seed, scheme="locational",
            u=args.u, v=args.v, noise=noise,
            threshold_fraction=args.threshold_fraction,
        )
        layout = {"u": args.u, "v": args.v, "H": "", "b": ""}
    else:
        cfg = analysis.ExperimentConfig(
            n=args.n, theta_grid=args.theta_grid, theta0=args.theta0,
            trials=args.trials, master_seed=args.seed, scheme="minhash",
            mh_hashes=args.hashes, mh_bits=args.bits, mh_kmer=args.kmer, noise=noise,
        )
        layout = {"u": "", "v": "", "H": args.hashes, "b": args.bits}
    summaries, records = analysis.run_distortion_mc(cfg)
    rows = [
        {"scheme": cfg.scheme, "B": cfg.payload_bits, "n": cfg.n, **layout, **s}
        for s in summaries
    ]
    if args.records:
        rec_header = [
            "theta", "trial_index", "trial_seed", "theta_actual", "theta_hat",
            "squared_error", "abstained", "mode_in_window", "mode_value",
        ]
        rec_rows = [vars(r) for r in records]
        _atomic_write(args.records, _rows_to_csv(rec_header, rec_rows).encode("ascii"))
    if args.json:
        _emit(json.dumps(rows, indent=2) + "\n", args.out)
    else:
        _emit(_rows_to_csv(_SIM_HEADER, rows), args.out)
    return 0


def _cmd_verify(args) -> int:
    if args.check == "repeat":
        report = analysis.verify_repeat_bound(args.n, args.trials, args.seed)
        summary = (
            f"repeat: n={report['n']} k={report['k']} trials={report['trials']} "
            f"frequency={_fmt(report['frequency'])} bound={_fmt(report['bound'])} "
            f"(+3 sigma = {_fmt(report['bound'] + 3 * report['mc_sigma'])})"
        )
        ok = report["pass"]
    elif args.check == "lemma-pmf":
        report = analysis.verify_lemma_pmf(args.n, args.theta, args.v, args.trials, args.seed)
        alpha = report["alpha"]
        in_ok = report["in_window_mass"] >= alpha - args.slack
        off_ok = report["max_off_window"] <= 2.0 ** (-(args.v - 1)) + args.off_slack
        summary = (
            f"lemma-pmf: n={report['n']} theta={_fmt(report['theta'])} v={report['v']} "
            f"trials={report['trials']} in_window_mass={_fmt(report['in_window_mass'])} "
            f"(>= {_fmt(alpha - args.slack)}) max_off_window={_fmt(report['max_off_window'])} "
            f"(<= {_fmt(2.0 ** (-(args.v - 1)) + args.off_slack)})"
        )
        ok = in_ok and off_ok
        report = {**report, "pass": ok}
    else:  # bins
        report = analysis.verify_bins(args.u, args.v, args.n, args.theta0, args.trials, args.seed)
        summary = (
            f"bins: u={report['u']} v={report['v']} n={report['n']} trials={report['trials']} "
            f"threshold={_fmt(report['threshold'])} tail={_fmt(report['tail_frequency'])} "
            f"bound={_fmt(report['bound'])} valid={_fmt(report['bound_valid'])}"
        )
        ok = report["pass"]
        if not report["bound_valid"]:
            _info(args, "bins: bound validity condition fails for this configuration")
    if args.json:
        printable = {k: v for k, v in report.items() if k != "pmf"}
        if "pmf" in report:
            printable["pmf"] = {str(k): v for k, v in report["pmf"].items()}
        if "f_histogram" in report:
            printable["f_histogram"] = {str(k): v for k, v in report["f_histogram"].items()}
        print(json.dumps(printable, indent=2))
    print(("PASS " if ok else "FAIL ") + summary)
    return 0 if ok else DATA_ERROR


def _cmd_bounds(args) -> int:
    alpha0 = args.theta0 / (2.0 - args.theta0)
    rows = []
    for B in args.B:
        uv = analysis.theorem_params(B, alpha0)
        row = {"B": B, "theta0": args.theta0, "beta": args.beta}
        if uv is not None:
            u, v = uv
            row.update(
                u=u, v=v,
                upper_uv=analysis.bound_upper_uv(u, v, alpha0, "result"),
                upper_uv_proof=analysis.bound_upper_uv(u, v, alpha0, "proof"),
            )
        else:
            row.update(u="", v="", upper_uv="", upper_uv_proof="")
        row.update(
            upper_theorem=analysis.bound_theorem(B, alpha0),
            noisy_theorem=analysis.bound_theorem_noisy(B, alpha0, args.beta),
            lower_converse=analysis.bound_lower(B, args.theta0),
        )
        rows.append(row)
    header = [
        "B", "theta0", "beta", "u", "v", "upper_uv", "upper_uv_proof",
        "upper_theorem", "noisy_theorem", "lower_converse",
    ]
    if args.json:
        _emit(json.dumps(rows, indent=2) + "\n", args.out)
    else:
        _emit(_rows_to_csv(header, rows), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def _build_parser() -> _Parser:
    parser = _Parser(prog="locsketch", description=__doc__)
    parser.add_argument("--quiet", action="store_true", help="suppress informational stderr output")
    parser.add_argument("--verbose", action="store_true", help="report extra detail on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sketch", help="sketch a bit-sequence file into a .lsk file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--u", type=int, required=True, help="number of orderings")
    p.add_argument("--v", type=int, required=True, help="bits per entry")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_sketch)

    p = sub.add_parser("estimate", help="estimate overlap from two .lsk files")
    p.add_argument("sketch_a")
    p.add_argument("sketch_b")
    p.add_argument("--theta0", type=float, required=True, help="minimum detectable overlap")
    p.add_argument("--threshold-fraction", type=float, default=1.0 / 6.0)
    p.add_argument("--beta", type=float, default=0.0, help="noise scale for the abstention threshold")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("allpairs", help="estimate overlap for every pair of .lsk files in a directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--threshold-fraction", type=float, default=1.0 / 6.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_allpairs)

    p = sub.add_parser("baseline", help="min-hash baseline sketching and estimation")
    bsub = p.add_subparsers(dest="baseline_command", required=True, parser_class=_Parser)
    b = bsub.add_parser("sketch", help="sketch a bit-sequence file into a .mhs file")
    b.add_argument("--in", dest="infile", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--hashes", type=int, required=True, help="number of hash functions")
    b.add_argument("--bits", type=int, required=True, help="fingerprint bits")
    b.add_argument("--kmer", type=int, default=0, help="k-mer length (default: ceil(3*log2 n))")
    b.add_argument("--seed", type=int, required=True)
    b.set_defaults(func=_cmd_baseline_sketch)
    b = bsub.add_parser("estimate", help="estimate overlap from two .mhs files")
    b.add_argument("sketch_a")
    b.add_argument("sketch_b")
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=_cmd_baseline_estimate)

    p = sub.add_parser("simulate", help="Monte Carlo distortion runs and rate-distortion sweeps")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--theta-grid", type=lambda s: _parse_grid(s, float), default=None,
                   help="comma-separated overlap values (default: 0 and theta0..1 by 0.05)")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--scheme", choices=["locational", "minhash"], default="locational")
    p.add_argument("--u", type=int, default=0)
    p.add_argument("--v", type=int, default=0)
    p.add_argument("--hashes", type=int, default=0)
    p.add_argument("--bits", type=int, default=16)
    p.add_argument("--kmer", type=int, default=0)
    p.add_argument("--beta", type=float, default=0.0,
                   help="channel noise scale; crossover p = beta / log2(n)")
    p.add_argument("--threshold-fraction", type=float, default=1.0 / 6.0)
    p.add_argument("--sweep", action="store_true", help="sweep bit budgets instead of one config")
    p.add_argument("--B-grid", dest="B_grid", type=lambda s: _parse_grid(s, int), default=None)
    p.add_argument("--records", help="also write per-trial records to this CSV file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="empirical checks of the scheme's analytic ingredients")
    vsub = p.add_subparsers(dest="check", required=True, parser_class=_Parser)
    v = vsub.add_parser("lemma-pmf", help="concentration of single-ordering sketch differences")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--theta", type=float, required=True)
    v.add_argument("--v", type=int, required=True)
    v.add_argument("--trials", type=int, required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--slack", type=float, default=0.05, help="Monte Carlo slack on the window mass")
    v.add_argument("--off-slack", type=float, default=0.01, help="slack on the off-window bin bound")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=_cmd_verify)
    v = vsub.add_parser("repeat", help="probability of a repeated 3*log2(n)-window")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--trials", type=int, required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=_cmd_verify)
    v = vsub.add_parser("bins", help="tail of the max difference multiplicity on disjoint inputs")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--u", type=int, required=True)
    v.add_argument("--v", type=int, required=True)
    v.add_argument("--theta0", type=float, required=True)
    v.add_argument("--trials", type=int, required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bounds", help="evaluate the analytic distortion bound curves")
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--B", type=lambda s: _parse_grid(s, int), required=True,
                   help="comma-separated sketch sizes in bits")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bounds)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        print(f"locsketch: kernel backend = {BACKEND}", file=sys.stderr)
    try:
        return args.func(args)
    except LocsketchError as exc:
        print(f"locsketch {args.command}: {exc}", file=sys.stderr)
        return DATA_ERROR
    except OSError as exc:
        print(f"locsketch {args.command}: {exc}", file=sys.stderr)
        return DATA_ERROR
    except ValueError as exc:
        print(f"locsketch {args.command}: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
