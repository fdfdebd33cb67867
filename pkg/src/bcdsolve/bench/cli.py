"""Command line interface.

Subcommands::

    bcdsolve run-integral [--config FILE] [--out DIR] [--KEY VALUE]...
    bcdsolve run-ct       [--config FILE] [--out DIR] [--KEY VALUE]...
    bcdsolve adjoint-check --problem {integral,ct} [--KEY VALUE]...
    bcdsolve norm-estimate --problem {integral,ct} [--KEY VALUE]...

Any configuration key can be overridden with ``--KEY VALUE`` pairs.
Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import sys

import numpy as np

from ..operators import operator_norm
from ..solvers import DivergenceError
from .config import CTConfig, IntegralConfig, parse_config
from .experiments import (
    build_ct_problem,
    build_integral_problem,
    run_ct_experiment,
    run_integral_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _collect_overrides(extras):
    if len(extras) % 2 != 0:
        raise ValueError(f"flag overrides must come in '--key value' pairs: {extras}")
    overrides = {}
    for flag, value in zip(extras[0::2], extras[1::2]):
        if not flag.startswith("--"):
            raise ValueError(f"expected a '--key' flag, got {flag!r}")
        overrides[flag[2:].replace("-", "_")] = value
    return overrides


def _load_config(cls, config_path, extras):
    mapping = parse_config(config_path) if config_path else {}
    mapping.update(_collect_overrides(extras))
    return cls.from_mapping(mapping)


def _adjoint_defect(apply_fn, adjoint_fn, dom, ran, n_pairs, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        x = rng.standard_normal(dom)
        y = rng.standard_normal(ran)
        ax = apply_fn(x)
        aty = adjoint_fn(y)
        lhs = float(np.vdot(ax, y))
        rhs = float(np.vdot(x, aty))
        scale = max(abs(lhs), abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def _cmd_run_integral(args, extras):
    cfg = _load_config(IntegralConfig, args.config, extras)
    report = run_integral_experiment(cfg, args.out)
    print(f"wrote {len(report['runs'])} traces to {args.out}")
    print(f"realized noise level delta = {report['delta']:.6g}")
    return EXIT_OK


def _cmd_run_ct(args, extras):
    cfg = _load_config(CTConfig, args.config, extras)
    report = run_ct_experiment(cfg, args.out)
    print(f"wrote {len(report['runs'])} traces to {args.out}")
    print(f"noise standard deviation = {report['noise_std']:.6g}")
    return EXIT_OK


def _cmd_adjoint_check(args, extras):
    if args.problem == "integral":
        cfg = _load_config(IntegralConfig, args.config, extras)
        op, *_ = build_integral_problem(cfg)
        dom = (op.n_blocks, op.K.domain_dim)
        ran = (op.n_data_blocks, op.K.range_dim)
        defect = _adjoint_defect(op.apply, op.adjoint_apply, dom, ran, 100)
    else:
        cfg = _load_config(CTConfig, args.config, extras)
        system, *_ = build_ct_problem(cfg)
        proj = system.projector
        defect = _adjoint_defect(
            proj.apply, proj.adjoint_apply, proj.domain_dim, proj.range_dim, 50
        )
    print(f"max relative adjoint defect over random pairs: {defect:.3e}")
    if defect > 1e-10:
        print("adjoint test FAILED (tolerance 1e-10)")
        return EXIT_NUMERICAL
    print("adjoint test passed (tolerance 1e-10)")
    return EXIT_OK


def _cmd_norm_estimate(args, extras):
    if args.problem == "integral":
        cfg = _load_config(IntegralConfig, args.config, extras)
        op, *_ = build_integral_problem(cfg)
        k_norm = operator_norm(op.K)
        print(f"||K|| ~ {k_norm:.10g}")
        print(f"certified constant step gamma_min/||K||^2 = "
              f"{cfg.effective_gamma_min() / k_norm ** 2:.10g}")
    else:
        cfg = _load_config(CTConfig, args.config, extras)
        system, *_ = build_ct_problem(cfg)
        norm = operator_norm(system.projector)
        print(f"||R|| ~ {norm:.10g}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bcdsolve",
        description="Block coordinate descent experiments for tensor-product inverse problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-integral", help="integral-equation benchmark")
    p.add_argument("--config", default=None, help="flat key = value file")
    p.add_argument("--out", default="out_integral", help="output directory")
    p.set_defaults(func=_cmd_run_integral)

    p = sub.add_parser("run-ct", help="multi-spectral CT benchmark")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="out_ct")
    p.set_defaults(func=_cmd_run_ct)

    p = sub.add_parser("adjoint-check", help="verify forward/adjoint pairing")
    p.add_argument("--problem", choices=("integral", "ct"), required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_adjoint_check)

    p = sub.add_parser("norm-estimate", help="power-iteration operator norms")
    p.add_argument("--problem", choices=("integral", "ct"), required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_norm_estimate)
    return parser


def main(argv=None):
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    try:
        return args.func(args, extras)
    except (ValueError, OSError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
