"""Command-line interface.

Subcommands: ``generate`` (write an ANM dataset), ``theory`` (analytic
error report for an oracle/noise configuration), and ``bench
known|unknown|pairs`` (the three benchmark harnesses). Exit codes:
0 success, 1 runtime failure, 2 argument errors. Outputs are written
atomically so an invalid invocation never leaves partial files, and a
fully resolved copy of the configuration is echoed into every JSON
output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from . import bench as _bench
from .datagen import NoiseSpec, generate, write_dataset_csv
from .errors import AnmasymError
from .oracle import parse_oracle, split_oracle_tokens
from .theory import Density1D, expected_anticausal_error


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _nonnegative_float(text):
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _sigma_list(text):
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sigma list {text!r}") from None
    if not values or any(s < 0 for s in values):
        raise argparse.ArgumentTypeError(f"bad sigma list {text!r}")
    return values


def _oracle_list(text):
    tokens = split_oracle_tokens(text)
    if not tokens:
        raise argparse.ArgumentTypeError("empty oracle list")
    try:
        return [parse_oracle(tok) for tok in tokens]
    except AnmasymError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _single_oracle(text):
    try:
        return parse_oracle(text)
    except AnmasymError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _density_tag(text):
    try:
        Density1D.from_tag(text)
    except AnmasymError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".anmasym-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anmasym",
        description="Causal vs. anticausal prediction error toolkit "
                    "for additive-noise models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic ANM dataset")
    gen.add_argument("--oracle", type=_single_oracle, required=True,
                     metavar="TOKEN",
                     help="e.g. linear, exp:a=1,norm, pow:a=5,norm")
    gen.add_argument("--sigma", type=_nonnegative_float, required=True)
    gen.add_argument("--noise-law", choices=("gaussian", "uniform"),
                     default="gaussian")
    gen.add_argument("--n", type=_positive_int, default=1000)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--noise-policy",
                     choices=("resample", "clamp", "none"),
                     default="resample")
    gen.add_argument("--out", required=True, metavar="CSV")

    theo = sub.add_parser("theory", help="analytic error report")
    theo.add_argument("--oracle", type=_single_oracle, required=True,
                      metavar="TOKEN")
    theo.add_argument("--sigma", type=_nonnegative_float, required=True)
    theo.add_argument("--noise-law", choices=("gaussian", "uniform"),
                      default="gaussian")
    theo.add_argument("--density", type=_density_tag, default="uniform",
                      help="cause density: uniform, exp-tilt:a=1, "
                           "power-tilt:k=2")
    theo.add_argument("--out", default=None, metavar="JSON",
                      help="write the report here (default: stdout)")

    ben = sub.add_parser("bench", help="run a benchmark harness")
    mode = ben.add_subparsers(dest="mode", required=True)

    known = mode.add_parser("known", help="exact oracle vs exact inverse")
    unknown = mode.add_parser("unknown", help="smoothing splines both ways")
    for p in (known, unknown):
        p.add_argument("--oracles", type=_oracle_list, required=True,
                       metavar="TOKENS", help="comma-separated oracle tokens")
        p.add_argument("--sigmas", type=_sigma_list, required=True,
                       metavar="LIST")
        p.add_argument("--n", type=_positive_int, default=1000)
        p.add_argument("--runs", type=_positive_int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, metavar="PREFIX",
                       help="writes PREFIX.csv and PREFIX.json")
    known.add_argument("--noise-policy",
                       choices=("auto", "resample", "clamp", "none"),
                       default="auto")
    known.add_argument("--noise-law", choices=("gaussian", "uniform"),
                       default="gaussian")
    unknown.add_argument("--noise-law", choices=("gaussian", "uniform"),
                         default="uniform")
    unknown.add_argument("--lambda", dest="lam", type=float, default=None,
                         help="fixed spline penalty (default: GCV)")

    pairs = mode.add_parser("pairs", help="cause-effect pair corpus")
    pairs.add_argument("--dir", required=True, metavar="DIR")
    pairs.add_argument("--meta", required=True, metavar="FILE")
    pairs.add_argument("--out", required=True, metavar="PREFIX")

    return parser


def _cmd_generate(args) -> int:
    noise = (NoiseSpec.gaussian(args.sigma) if args.noise_law == "gaussian"
             else NoiseSpec.uniform(args.sigma))
    data = generate(args.oracle, noise, args.n, args.seed,
                    noise_policy=args.noise_policy)
    write_dataset_csv(data, args.out)
    return 0


def _cmd_theory(args) -> int:
    noise = (NoiseSpec.gaussian(args.sigma) if args.noise_law == "gaussian"
             else NoiseSpec.uniform(args.sigma))
    density = Density1D.from_tag(args.density)
    report = expected_anticausal_error(args.oracle, density, noise)
    payload = report.to_json_dict()
    payload["config"] = {
        "oracle": args.oracle.token(),
        "sigma": args.sigma,
        "noise_law": args.noise_law,
        "density": args.density,
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _emit_reports(reports, out_prefix):
    rows = [rep.csv_row() for rep in reports]
    _write_atomic(out_prefix + ".csv", _bench.render_results_csv(rows))
    summary = {"reports": [rep.to_json_dict() for rep in reports]}
    _write_atomic(out_prefix + ".json", _bench.render_summary_json(summary))


def _cmd_bench(args) -> int:
    if args.mode == "known":
        reports = _bench.run_known_oracle(
            args.oracles, args.sigmas, n=args.n, runs=args.runs,
            base_seed=args.seed, noise_policy=args.noise_policy,
            noise_law=args.noise_law,
        )
        _emit_reports(reports, args.out)
    elif args.mode == "unknown":
        reports = _bench.run_unknown_oracle(
            args.oracles, args.sigmas, n=args.n, runs=args.runs,
            base_seed=args.seed, noise_law=args.noise_law, lam=args.lam,
        )
        _emit_reports(reports, args.out)
    else:
        records, skips = _bench.ingest_pairs(args.dir, args.meta)
        if not records:
            raise AnmasymError(
                f"no usable pairs in {args.dir} (skips: {len(skips)})"
            )
        summary = _bench.run_pairs_benchmark(records, skips)
        _write_atomic(args.out + ".csv",
                      _bench.render_results_csv(summary.rows))
        payload = summary.to_json_dict()
        payload["config"] = {"dir": args.dir, "meta": args.meta}
        _write_atomic(args.out + ".json",
                      _bench.render_summary_json(payload))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "theory":
            return _cmd_theory(args)
        return _cmd_bench(args)
    except AnmasymError as exc:
        print(f"anmasym: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"anmasym: i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
