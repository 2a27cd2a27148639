"""Command-line harness.

Subcommands: spectrum, eigen, risk, bounds, rates, fig1, fig2, hermite.
Each takes --config/--seed/--out/--constants; outputs are CSV files plus a
JSON manifest, written deterministically.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config, parse_config
from .eigenbounds import BoundConstants
from .experiments import (CURVE_COLUMNS, DISK_COLUMNS, disk_variance_curves,
                          multiple_descent_curves, run, write_csv)
from .kernels import eval_dot_kernel
from .krr import rate_predictions
from .spectrum import hermite_moment, mercer_spectrum

DEFAULT_CONFIG = 'kernel = { family = "ntk", depth = 3 }\n'


def _common_flags(parser):
    parser.add_argument("--config", type=Path, default=None,
                        help="flat key-table config file")
    parser.add_argument("--seed", type=int, default=0, help="base seed offset")
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory")
    parser.add_argument("--constants", type=str, default=None,
                        help="bound constants as 'c1,c2,C,C1,C2'")


def _load(args) -> ExperimentConfig:
    constants = BoundConstants.from_string(args.constants) if args.constants else None
    if args.config is not None:
        cfg = load_config(args.config, constants)
    else:
        cfg = parse_config(DEFAULT_CONFIG, constants)
    if args.seed:
        cfg = ExperimentConfig(**{**cfg.__dict__,
                                  "seeds": tuple(s + args.seed for s in cfg.seeds)})
    return cfg


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    profile = mercer_spectrum(cfg.kernel, cfg.d, cfg.l_max)
    header, rows = profile.csv_rows()
    write_csv(args.out / "spectrum.csv", header, rows)
    h1 = eval_dot_kernel(cfg.kernel, 1.0)
    included = sum(s for _, s, _ in profile.degrees)
    print(f"kernel {cfg.kernel.label()} d={cfg.d} l_max={cfg.l_max}: "
          f"degree mass {included:.12g} of h(1) = {h1:.12g} "
          f"(remainder {profile.tail_remainder:.3g})")
    return 0


def cmd_eigen(args) -> int:
    return _exit(run(_load(args), args.out))


def cmd_risk(args) -> int:
    return _exit(run(_load(args), args.out))


def cmd_bounds(args) -> int:
    cfg = _load(args)
    failures = run(cfg, args.out)
    risk = (args.out / "risk.csv").read_text().splitlines()
    for line in risk[:6]:
        print(line)
    return _exit(failures)


def cmd_rates(args) -> int:
    params = {}
    for item in (args.params.split(",") if args.params else []):
        key, _, val = item.partition("=")
        params[key.strip()] = Fraction(val.strip())
    pred = rate_predictions(args.regime, **params)
    rows = [(pred.regime,
             ";".join(f"{k}={v}" for k, v in pred.params.items()),
             pred.axis,
             ";".join(str(e) for e in pred.variance_exponents),
             str(pred.bias_exponent),
             int(pred.variance_grows), int(pred.log_factors))]
    write_csv(args.out / "rates.csv", ("regime", "params", "axis",
                                       "variance_exponents", "bias_exponent",
                                       "variance_grows", "log_factors"), rows)
    direction = "grows like" if pred.variance_grows else "decays like"
    axis = pred.axis
    exps = " + ".join(f"{axis}^-{e}" for e in pred.variance_exponents)
    if pred.variance_grows:
        exps = " + ".join(f"{axis}^{e}" for e in pred.variance_exponents)
    print(f"{pred.regime}: variance {direction} {exps}; "
          f"bias decays like {axis}^-{pred.bias_exponent}")
    return 0


def cmd_fig1(args) -> int:
    rows = multiple_descent_curves(
        kernel_name=args.kernel,
        d_values=tuple(int(v) for v in args.d_values.split(",")),
        n_values=tuple(int(v) for v in args.n_values.split(",")),
        num_seeds=args.num_seeds, sigma_eps=args.sigma_eps, m_test=args.m_test)
    write_csv(args.out / "fig1.csv", CURVE_COLUMNS, rows)
    print(f"wrote {args.out / 'fig1.csv'} ({len(rows)} rows)")
    return 0


def cmd_fig2(args) -> int:
    rows = disk_variance_curves(
        n_values=tuple(int(v) for v in args.n_values.split(",")),
        num_seeds=args.num_seeds, sigma_eps=args.sigma_eps, m_test=args.m_test)
    write_csv(args.out / "fig2.csv", DISK_COLUMNS, rows)
    print(f"wrote {args.out / 'fig2.csv'} ({len(rows)} rows)")
    return 0


def cmd_hermite(args) -> int:
    orders = [int(v) for v in args.orders.split(",")]
    rows = []
    for i in orders:
        for seed in range(args.num_seeds):
            est, se = hermite_moment(i, args.p, args.samples, seed + args.seed)
            rows.append((i, args.p, seed, est, se))
    write_csv(args.out / "hermite.csv", ("i", "p", "seed", "estimate", "stderr"), rows)
    for i in orders:
        vals = [r[3] for r in rows if r[0] == i]
        print(f"order {i}: median moment estimate {np.median(vals):.6g}")
    return 0


def _exit(failures: int) -> int:
    if failures:
        print(f"{failures} grid cell(s) failed; see errors.csv", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="krrlab",
        description="kernel regression spectra, eigenvalue envelopes, and "
                    "overfitting experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, extra in [
        ("spectrum", cmd_spectrum, None),
        ("eigen", cmd_eigen, None),
        ("risk", cmd_risk, None),
        ("bounds", cmd_bounds, None),
    ]:
        p = sub.add_parser(name)
        _common_flags(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("rates")
    _common_flags(p)
    p.add_argument("--regime", required=True,
                   choices=["high_dim", "fixed_dim_interp", "fixed_dim_reg",
                            "time_mapped"])
    p.add_argument("--params", default="",
                   help="comma list like a=1/2,b=0,r=2 (exact fractions)")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("fig1")
    _common_flags(p)
    p.add_argument("--kernel", default="poly3", choices=["poly3", "ntk3"])
    p.add_argument("--d-values", default="8,16,32")
    p.add_argument("--n-values", default=",".join(str(2 ** j) for j in range(3, 12)))
    p.add_argument("--num-seeds", type=int, default=20)
    p.add_argument("--sigma-eps", type=float, default=1.0)
    p.add_argument("--m-test", type=int, default=1000)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("fig2")
    _common_flags(p)
    p.add_argument("--n-values", default="64,128,256,512")
    p.add_argument("--num-seeds", type=int, default=20)
    p.add_argument("--sigma-eps", type=float, default=1.0)
    p.add_argument("--m-test", type=int, default=1000)
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("hermite")
    _common_flags(p)
    p.add_argument("--orders", default="4,8,12")
    p.add_argument("--p", type=float, default=4.0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--num-seeds", type=int, default=10)
    p.set_defaults(func=cmd_hermite)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
