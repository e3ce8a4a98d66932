"""Command-line front end: run experiments, draw samples, evaluate variances.

Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .experiments import (
    ExperimentConfig,
    RegressionDegenerateError,
    bump_integrand,
    run_variance_decay,
)
from .kernel import CDKernel, ProductMeasure
from .sampler import SamplerConfig, SamplerError, sample
from .variance import cheb_coeffs, dirichlet_bound, omega_f_omega_sq, sigma_f_sq


def parse_measure(spec: str) -> ProductMeasure:
    """Parse 'jacobi:<a,b>;<a,b>;...' into a product measure."""
    if ":" not in spec:
        raise ValueError(f"measure spec {spec!r} missing family prefix")
    family, _, body = spec.partition(":")
    if family != "jacobi":
        raise ValueError(f"unsupported measure family {family!r}")
    pairs = []
    for part in body.split(";"):
        vals = part.split(",")
        if len(vals) != 2:
            raise ValueError(f"bad marginal spec {part!r}; expected 'alpha,beta'")
        pairs.append((float(vals[0]), float(vals[1])))
    return ProductMeasure.jacobi(pairs)


def _cmd_run(args) -> int:
    with open(args.config) as fh:
        raw = json.load(fh)
    if args.csv:
        raw["csv_path"] = args.csv
    if args.json:
        raw["json_path"] = args.json
    config = ExperimentConfig.from_dict(raw)
    try:
        result = run_variance_decay(config)
    except RegressionDegenerateError as exc:
        if config.csv_path:
            exc.partial.write_csv(config.csv_path)
        if config.json_path:
            exc.partial.write_json(config.json_path)
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for dim in result.dimensions:
        fit = dim.fit
        print(
            f"d={dim.d}: slope {fit.slope:+.4f}  95% CI (OLS) "
            f"[{fit.lo:+.4f}, {fit.hi:+.4f}]  theoretical {dim.theoretical:+.4f}  "
            f"retained {len(dim.retained_N)}/{len(dim.cells)} cells"
        )
    if config.csv_path:
        print(f"replicates written to {config.csv_path}")
    if config.json_path:
        print(f"summary written to {config.json_path}")
    return 0


def _cmd_sample(args) -> int:
    measure = parse_measure(args.measure)
    if measure.d != args.d:
        raise ValueError(
            f"--d {args.d} disagrees with measure dimension {measure.d}"
        )
    kernel = CDKernel(measure, args.n)
    cfg = SamplerConfig(rng_seed=args.seed, safety_factor=args.safety_factor)
    ws = sample(kernel, cfg)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x_{j + 1}" for j in range(measure.d)] + ["weight"])
        for row, w in zip(ws.points, ws.weights):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(w))])
    print(
        f"wrote {ws.n} nodes to {args.out} "
        f"(bound {ws.diagnostics.bound:.4g}, "
        f"{ws.diagnostics.total_proposals} proposals)"
    )
    return 0


def _cmd_variance(args) -> int:
    if args.f != "bump":
        raise ValueError(f"unknown integrand {args.f!r}; available: bump")
    f = bump_integrand(args.d, args.eps)
    if args.measure is None:
        measure = ProductMeasure.equilibrium(args.d)
    else:
        measure = parse_measure(args.measure)
        if measure.d != args.d:
            raise ValueError("--measure dimension disagrees with --d")
    sig = sigma_f_sq(cheb_coeffs(f, args.d, args.cutoff))
    omg = omega_f_omega_sq(f, measure.density, args.d, args.cutoff)
    bound = dirichlet_bound(f)
    payload = {
        "f": args.f,
        "epsilon": args.eps,
        "d": args.d,
        "cutoff": args.cutoff,
        "measure": measure.describe(),
        "sigma_sq": sig.value,
        "sigma_sq_tail_bound": sig.tail_bound,
        "omega_sq": omg.value,
        "omega_sq_tail_bound": omg.tail_bound,
        "dirichlet_bound": bound,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dppmc",
        description="Monte Carlo quadrature with determinantal node sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the variance-decay experiment")
    p_run.add_argument("--config", required=True, help="JSON experiment config")
    p_run.add_argument("--csv", default=None, help="override replicate CSV path")
    p_run.add_argument("--json", default=None, help="override summary JSON path")
    p_run.set_defaults(func=_cmd_run)

    p_sample = sub.add_parser("sample", help="draw one weighted node set")
    p_sample.add_argument("--d", type=int, required=True)
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument(
        "--measure",
        required=True,
        help="product measure, e.g. jacobi:-0.5,-0.5;0.3,-0.2",
    )
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--safety-factor", type=float, default=1.2)
    p_sample.add_argument("--out", required=True, help="output CSV path")
    p_sample.set_defaults(func=_cmd_sample)

    p_var = sub.add_parser("variance", help="limiting variance functionals")
    p_var.add_argument("--f", required=True, help="integrand name (bump)")
    p_var.add_argument("--eps", type=float, default=0.05)
    p_var.add_argument("--d", type=int, required=True)
    p_var.add_argument("--cutoff", type=int, required=True)
    p_var.add_argument("--measure", default=None, help="density for the omega term")
    p_var.set_defaults(func=_cmd_variance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SamplerError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
