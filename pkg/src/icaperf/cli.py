"""Command-line interface: ``icaperf {estimate,index,simulate,asymptotics,bench}``.

Exit codes: 0 success, 1 usage or validation error, 2 runtime/numerical
failure.  All randomness comes from ``--seed`` flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import asymptotics, indices
from .estimators import EstimatorError, FastIcaConfig, fastica_deflation, fobi
from .model import SingularMatrixError, format_matrix_csv, read_matrix_csv, write_matrix_csv
from .simulate import (SimulationConfig, fastica_order_config, parse_sources, run_study,
                       sample_sources, summarize, write_summary_csv)

DEFAULT_SOURCES = "laplace,logistic,beta33"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _read(path):
    try:
        return read_matrix_csv(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix {path}: {exc}")


def _fastica_flags_given(args):
    return [f for f, v in (("--g", args.g), ("--init", getattr(args, "init", None)),
                           ("--tol", args.tol), ("--max-iter", args.max_iter))
            if v is not None]


def _fastica_cfg(args, init):
    kw = {"nonlinearity": args.g or "tanh", "init": init}
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.max_iter is not None:
        kw["max_iter"] = args.max_iter
    return kw


def cmd_estimate(args):
    if args.method == "fobi":
        given = _fastica_flags_given(args)
        if given:
            raise UsageError(f"{', '.join(given)} only apply to --method fastica")
    x = _read(args.input)
    if args.method == "fobi":
        res = fobi(x)
        gamma = res.gamma
        meta = {"method": "fobi", "lambdas": res.lambdas.tolist(), "tied": res.tied}
    else:
        init = args.init or "identity"
        if init not in ("identity", "random"):
            init = _read(init)
        try:
            cfg = FastIcaConfig(seed=args.seed, **_fastica_cfg(args, init))
        except ValueError as exc:
            raise UsageError(str(exc))
        res = fastica_deflation(x, cfg)
        gamma = res.gamma
        meta = {"method": "fastica", "g": cfg.nonlinearity,
                "iterations": res.iterations.tolist(),
                "converged": res.converged.tolist()}
    write_matrix_csv(args.out, gamma)
    Path(args.out).with_suffix(".json").write_text(json.dumps(meta) + "\n")
    return 0


def cmd_index(args):
    metrics = [m.strip() for m in args.metric.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in indices.METRICS and m != "gce"]
    if unknown:
        raise UsageError(f"unknown metric(s): {', '.join(unknown)}")
    omega = _read(args.omega) if args.omega else None
    gamma = _read(args.gamma) if args.gamma else None
    if "gce" in metrics and (omega is None or gamma is None):
        raise UsageError("metric gce needs --omega and --gamma")
    if args.gain:
        g = _read(args.gain)
    elif omega is not None and gamma is not None:
        g = gamma @ omega
    elif any(m != "gce" for m in metrics):
        raise UsageError("--gain (or --omega with --gamma) is required")
    for m in metrics:
        try:
            val = indices.gce_index(omega, gamma) if m == "gce" else indices.METRICS[m](g)
        except SingularMatrixError:
            raise
        except ValueError as exc:
            raise UsageError(f"{m}: {exc}")
        print(f"{m},{val:.17g}")
    return 0


def cmd_simulate(args):
    try:
        sources = parse_sources(args.sources)
        fcfg = None
        order = "-"
        if args.method == "fastica":
            order = args.order or "b"
            fcfg = _order_cfg(args, order, len(sources))
        elif _fastica_flags_given(args) or args.order is not None:
            raise UsageError("--g, --order, --tol and --max-iter only apply to --method fastica")
        mixing = _read(args.mixing) if args.mixing else None
        cfg = SimulationConfig(sources, tuple(args.n), args.reps, args.method, fcfg,
                               order, mixing, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    result = run_study(cfg, threads=args.threads or os.cpu_count() or 1)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            result.write_csv(fh)
    else:
        result.write_csv(sys.stdout)
    if args.summary:
        with open(args.summary, "w", newline="") as fh:
            write_summary_csv(summarize(result), fh)
    return 0


def _order_cfg(args, order, p):
    kw = {}
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.max_iter is not None:
        kw["max_iter"] = args.max_iter
    return fastica_order_config(args.g or "tanh", order, p, **kw)


def cmd_asymptotics(args):
    try:
        sources = parse_sources(args.sources)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.order == "a":
        sources = sources[::-1]
    if args.method == "fastica":
        try:
            asv = asymptotics.fastica_asv(sources, args.g or "tanh")
        except ValueError as exc:
            raise UsageError(str(exc))
    else:
        if args.g is not None:
            raise UsageError("--g only applies to --method fastica")
        rng = np.random.default_rng(args.seed)
        ests = [fobi(sample_sources(sources, args.n, rng)).gamma for _ in range(args.reps)]
        asv = asymptotics.empirical_asv(ests, args.n, tuple(s.family for s in sources))
    sys.stdout.write(format_matrix_csv(asv.values))
    print(f"trace,{asymptotics.offdiag_trace_target(asv):.17g}")
    return 0


def cmd_bench(args):
    print("p,seconds")
    for p, secs in indices.benchmark(args.dims, args.count, args.seed):
        print(f"{p},{secs:.6f}")
    return 0


def build_parser():
    parser = _Parser(prog="icaperf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate an unmixing matrix from data")
    p.add_argument("--input", required=True)
    p.add_argument("--method", required=True, choices=["fobi", "fastica"])
    p.add_argument("--g", choices=["pow3", "tanh", "gauss"])
    p.add_argument("--init", help="identity, random, or a CSV file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("index", help="performance indices of a gain matrix")
    p.add_argument("--gain")
    p.add_argument("--metric", default="md", help="comma list of md,amari,isr,gce,md-col")
    p.add_argument("--omega")
    p.add_argument("--gamma")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("simulate", help="Monte Carlo study of n(p-1)D^2")
    p.add_argument("--sources", default=DEFAULT_SOURCES)
    p.add_argument("--method", default="fobi", choices=["fobi", "fastica"])
    p.add_argument("--g", choices=["pow3", "tanh", "gauss"])
    p.add_argument("--order", choices=["a", "b"])
    p.add_argument("--n", type=_int_list, default=[5000, 10000])
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    p.add_argument("--mixing")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("asymptotics", help="asymptotic variances and trace target")
    p.add_argument("--sources", default=DEFAULT_SOURCES)
    p.add_argument("--method", default="fastica", choices=["fobi", "fastica"])
    p.add_argument("--g", choices=["pow3", "tanh", "gauss"])
    p.add_argument("--order", choices=["a", "b"], default="b")
    p.add_argument("--n", type=int, default=20000, help="sample size (fobi, Monte Carlo)")
    p.add_argument("--reps", type=int, default=200, help="replications (fobi)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("bench", help="time 1000 MD index computations per dimension")
    p.add_argument("--dims", type=_int_list, default=[3, 5, 10, 25, 50, 100])
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"icaperf {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"icaperf {args.command}: {exc}", file=sys.stderr)
        return 1
    except (EstimatorError, SingularMatrixError, ArithmeticError,
            np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
        print(f"icaperf {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
