"""Command-line entry point: ``copra select`` and ``copra bench``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path

from .bench import manifest_path, run_benchmark, scenario
from .errors import InputError, NumericalError
from .estimators import Method
from .io import COMPLEX_FORMATS, read_matrix_csv, read_vector_csv
from .solver import SolverConfig, newton_solve
from .spectral import decompose

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2


def _parse_sweep(text):
    try:
        lo, step, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sweep must look like lo:step:hi, got {text!r}")
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("sweep needs step > 0 and hi >= lo")
    n = int(round((hi - lo) / step))
    return tuple(lo + k * step for k in range(n + 1))


def _parse_methods(text):
    try:
        return tuple(Method(m.strip().lower()) for m in text.split(",") if m.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser():
    parser = argparse.ArgumentParser(prog="copra", description="Regularizer selection and Monte-Carlo benchmarking.")
    sub = parser.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="select the regularizer for one model/observation pair")
    sel.add_argument("--matrix", required=True, type=Path, help="CSV file holding H, one row per line")
    sel.add_argument("--obs", required=True, type=Path, help="CSV file holding y")
    sel.add_argument("--complex", choices=COMPLEX_FORMATS, default=None, dest="complex_format",
                     help="complex encoding: 'paired' re,im columns or 'suffix' like 1+2j")
    sel.add_argument("--rho", type=float, default=SolverConfig.rho_rel,
                     help="relative stopping threshold (default: %(default)g)")
    sel.add_argument("--out", type=Path, default=None, help="write the result JSON here as well")

    bench = sub.add_parser("bench", help="run a Monte-Carlo scenario and write a results CSV")
    bench.add_argument("--scenario", required=True, choices=("s1", "s2", "s3"), type=str.lower)
    bench.add_argument("--trials", type=int, default=1000)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--methods", type=_parse_methods, default=tuple(Method))
    bench.add_argument("--out", required=True, type=Path)
    bench.add_argument("--sweep", type=_parse_sweep, default=None, help="lo:step:hi in dB")
    bench.add_argument("--workers", type=int, default=1)
    return parser


def _select(args):
    H = read_matrix_csv(args.matrix, args.complex_format)
    y = read_vector_csv(args.obs, args.complex_format)
    _, data = decompose(H, y)
    result = newton_solve(data, SolverConfig(rho_rel=args.rho))
    payload = {
        "gamma_tilde": result.gamma_tilde,
        "gamma": result.gamma,
        "iterations": result.iterations,
        "converged": result.converged,
        "fallback_used": result.fallback_used,
        "residual": result.residual,
        "rho": result.rho,
        "epsilon": result.epsilon,
        "bracket": list(result.bracket) if result.bracket else None,
        "fallback_kind": result.fallback_kind,
    }
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out is not None:
        args.out.write_text(text + "\n")


def _bench(args):
    overrides = {"trials": args.trials, "master_seed": args.seed}
    if args.sweep is not None:
        overrides["sweep"] = args.sweep
    cfg = scenario(args.scenario, **overrides)
    report = run_benchmark(cfg, args.methods, out=args.out, workers=args.workers)
    for row in report.rows:
        ber = "" if row.ber is None else f"  ber={row.ber:.4g}"
        print(f"{row.scenario} {row.sweep_db:6.1f} dB  {row.method:<9} nmse={row.mean_nmse_db:8.3f} dB{ber}")
    print(f"wrote {args.out} and {manifest_path(args.out)}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "select":
            _select(args)
        else:
            _bench(args)
    except InputError as exc:
        print(f"copra: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"copra: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"copra: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
