"""Command-line interface: bound | oracle | simulate | sweep | verify.

Records are printed as one line of key=value pairs with floats at 12
significant digits.  Exit codes: 0 success, 1 verification failure,
2 invalid flags or input (including the n <= 30 enumeration budget).
Thresholds are given either absolute (--x) or normalized (--s, with
x = s * n^((beta-1)/beta)); exactly one of the two must be present.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import report
from . import verify as verify_mod
from .bounds import (
    bernstein_numeric,
    bound_bn,
    bound_bn_entropy_form,
    bound_corollary,
    bound_rescaled,
    bound_tstat,
    corollary_is_extrapolated,
    endpoint_threshold,
    log_cosh,
    mdp_alpha_window,
    threshold_from_s,
    tstat_threshold,
    two_sided_bound,
)
from .oracle import FINAL_SUM, RUNNING_MAX, exact_tail, exact_tstat_tail
from .simulate import TSTAT, DistributionSpec, estimate_tail

__all__ = ["main", "build_parser"]

_STATS = {"running-max": RUNNING_MAX, "final-sum": FINAL_SUM, "tstat": TSTAT}
_KINDS = ("bn", "entropy", "corollary", "bernstein", "tstat", "two-sided", "rescaled")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _emit(pairs: list[tuple[str, object]]) -> None:
    print(" ".join(f"{key}={_fmt(value)}" for key, value in pairs))


def _read_magnitudes(path: str) -> np.ndarray:
    with open(path, "r", encoding="ascii") as handle:
        lines = handle.read().split("\n")
    values = [float(line) for line in lines if line.strip()]
    if not values:
        raise ValueError(f"no magnitudes found in {path!r}")
    return np.asarray(values, dtype=float)


def _parse_dist(text: str) -> DistributionSpec:
    kind, _, arg = text.partition(":")
    if kind in ("rademacher", "uniform", "gaussian"):
        if arg:
            raise ValueError(f"distribution {kind!r} takes no parameter")
        return getattr(DistributionSpec, kind)()
    if kind == "twopoint":
        if not arg:
            raise ValueError("twopoint needs a magnitude, e.g. twopoint:3.7")
        return DistributionSpec.two_point(float(arg))
    if kind == "pareto":
        if not arg:
            raise ValueError("pareto needs a tail index, e.g. pareto:1.2")
        return DistributionSpec.pareto(float(arg))
    if kind == "mags":
        if not arg:
            raise ValueError("mags needs a file path, e.g. mags:weights.txt")
        return DistributionSpec.fixed(_read_magnitudes(arg))
    raise ValueError(f"unknown distribution {text!r}")


def _resolve_x(args, n: int, beta: float) -> float:
    if (args.x is None) == (args.s is None):
        raise ValueError("exactly one of --x and --s is required")
    if args.s is not None:
        return threshold_from_s(n, beta, args.s)
    return args.x


def _require_x(args, context: str) -> float:
    if args.x is None or args.s is not None:
        raise ValueError(f"{context} takes an absolute threshold --x, not --s")
    return args.x


def _corollary_pairs(n: int, beta: float, x: float) -> list[tuple[str, object]]:
    s = x / endpoint_threshold(n, beta)
    q = 0.5 * x * x * float(n) ** (2.0 / beta - 1.0)
    return [
        ("s", s),
        ("regime", bound_bn(n, beta, x).regime),
        ("log_value", min(0.0, -q)),
        ("value", bound_corollary(n, beta, x)),
        ("extrapolated", corollary_is_extrapolated(beta)),
    ]


def cmd_bound(args) -> int:
    n, beta = args.n, args.beta
    pairs: list[tuple[str, object]] = [("kind", args.kind), ("n", n)]
    if args.kind == "tstat":
        x = _require_x(args, "kind tstat")
        tau = tstat_threshold(n, x)
        evaluation = bound_tstat(n, x)
        pairs += [
            ("x", x),
            ("tau", tau),
            ("regime", evaluation.regime),
            ("log_value", evaluation.log_value),
            ("value", evaluation.value),
        ]
        _emit(pairs)
        return 0
    pairs.append(("beta", beta))
    x = _resolve_x(args, n, beta)
    pairs.append(("x", x))
    if args.kind in ("bn", "entropy"):
        form = bound_bn if args.kind == "bn" else bound_bn_entropy_form
        evaluation = form(n, beta, x)
        pairs += [
            ("s", evaluation.s),
            ("regime", evaluation.regime),
            ("log_value", evaluation.log_value),
            ("value", evaluation.value),
        ]
    elif args.kind == "corollary":
        pairs += _corollary_pairs(n, beta, x)
    elif args.kind == "bernstein":
        result = bernstein_numeric(n, beta, x)
        log_value = -result.lambda_star * x + n * log_cosh(
            result.lambda_star / float(n) ** (1.0 / beta)
        )
        pairs += [
            ("s", x / endpoint_threshold(n, beta)),
            ("regime", bound_bn(n, beta, x).regime),
            ("lambda_star", result.lambda_star),
            ("iterations", result.iterations),
            ("log_value", log_value),
            ("value", result.objective_value),
        ]
    elif args.kind == "two-sided":
        evaluation = bound_bn(n, beta, x)
        pairs += [
            ("s", evaluation.s),
            ("regime", evaluation.regime),
            ("log_value", min(0.0, math.log(2.0) + evaluation.log_value)),
            ("value", two_sided_bound(n, beta, x)),
        ]
    else:  # rescaled
        if args.alpha is None:
            raise ValueError("kind rescaled needs --alpha")
        low, high = mdp_alpha_window(beta)
        scaled = x * float(n) ** args.alpha
        pairs += [
            ("alpha", args.alpha),
            ("alpha_low", low),
            ("alpha_high", high),
            ("in_window", low < args.alpha < high),
            ("value", bound_rescaled(n, beta, x, args.alpha)),
            ("scaled_x", scaled),
        ]
    _emit(pairs)
    return 0


def _oracle_magnitudes(args, dist: DistributionSpec) -> tuple[int, np.ndarray]:
    if not dist.supports_exact():
        raise ValueError(f"distribution {dist.kind!r} has no finite sign-vector enumeration")
    n = args.n
    if n is None:
        if dist.kind != "fixed_magnitudes":
            raise ValueError("--n is required")
        n = len(dist.magnitudes)
    return n, dist.exact_magnitudes(n)


def cmd_oracle(args) -> int:
    stat = _STATS[args.stat]
    dist = _parse_dist(args.dist)
    n, mags = _oracle_magnitudes(args, dist)
    if stat == TSTAT:
        x = _require_x(args, "stat tstat")
        tail = exact_tstat_tail(mags, x)
        bound = bound_tstat(n, x).value
        pairs = [
            ("n", n),
            ("x", x),
            ("stat", args.stat),
            ("hits", tail.hits),
            ("total", tail.total),
            ("degenerate", tail.degenerate),
            ("probability", tail.probability),
            ("bound", bound),
        ]
    else:
        x = _resolve_x(args, n, args.beta)
        tail = exact_tail(mags, args.beta, x, stat)
        pairs = [
            ("n", n),
            ("beta", args.beta),
            ("x", x),
            ("s", x / endpoint_threshold(n, args.beta)),
            ("stat", args.stat),
            ("hits", tail.hits),
            ("total", tail.total),
            ("probability", tail.probability),
            ("bound", bound_bn(n, args.beta, x).value),
        ]
    _emit(pairs)
    return 0


def cmd_simulate(args) -> int:
    stat = _STATS[args.stat]
    dist = _parse_dist(args.dist)
    n = args.n
    if n is None:
        raise ValueError("--n is required")
    pairs: list[tuple[str, object]] = [("dist", args.dist), ("n", n)]
    if stat == TSTAT:
        x = _require_x(args, "stat tstat")
        estimate = estimate_tail(dist, n, 2.0, x, stat, args.trials, args.seed)
        bound = bound_tstat(n, x).value
        pairs += [("x", x), ("stat", args.stat)]
    else:
        x = _resolve_x(args, n, args.beta)
        estimate = estimate_tail(dist, n, args.beta, x, stat, args.trials, args.seed)
        bound = bound_bn(n, args.beta, x).value
        pairs += [
            ("beta", args.beta),
            ("x", x),
            ("s", x / endpoint_threshold(n, args.beta)),
            ("stat", args.stat),
        ]
    halfwidth = estimate.ci_high - estimate.p_hat
    respected = estimate.p_hat <= bound + 3.0 * halfwidth
    pairs += [
        ("trials", estimate.trials),
        ("seed", estimate.seed),
        ("hits", estimate.hits),
        ("degenerate", estimate.degenerate_count),
        ("p_hat", estimate.p_hat),
        ("ci_low", estimate.ci_low),
        ("ci_high", estimate.ci_high),
        ("bound", bound),
    ]
    if stat != TSTAT:
        pairs.append(("corollary", bound_corollary(n, args.beta, x)))
    pairs.append(("respect", "PASS" if respected else "FAIL"))
    _emit(pairs)
    return 0


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(token) for token in text.split(","))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(token) for token in text.split(","))


def cmd_sweep(args) -> int:
    grid = report.SweepGrid(
        n_values=_int_list(args.n),
        beta_values=_float_list(args.beta),
        s_values=_float_list(args.s),
        stat=_STATS[args.stat],
        dist=_parse_dist(args.dist),
        trials=args.trials,
        seed=args.seed,
    )
    rows = report.run_sweep(grid)
    text = report.render_csv(rows) if args.format == "csv" else report.render_json(rows)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="ascii", newline="") as handle:
            handle.write(text)
    return 0


def cmd_verify(args) -> int:
    return verify_mod.run_suites(fast=args.fast)


def _add_threshold_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--x", type=float, help="absolute threshold")
    sub.add_argument("--s", type=float, help="threshold relative to n^((beta-1)/beta)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfnorm",
        description="Deviation bounds for self-normalized sums, with exact "
        "enumeration and Monte Carlo checks.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    bound = commands.add_parser("bound", help="evaluate a closed-form or numeric bound")
    bound.add_argument("--n", type=int, required=True)
    bound.add_argument("--beta", type=float, default=2.0)
    _add_threshold_flags(bound)
    bound.add_argument("--kind", choices=_KINDS, default="bn")
    bound.add_argument("--alpha", type=float, help="rescaling exponent for kind=rescaled")
    bound.set_defaults(func=cmd_bound)

    oracle_cmd = commands.add_parser("oracle", help="exact tail by sign-vector enumeration")
    oracle_cmd.add_argument("--n", type=int)
    oracle_cmd.add_argument("--beta", type=float, default=2.0)
    _add_threshold_flags(oracle_cmd)
    oracle_cmd.add_argument("--stat", choices=sorted(_STATS), default="running-max")
    oracle_cmd.add_argument("--dist", default="rademacher")
    oracle_cmd.set_defaults(func=cmd_oracle)

    simulate_cmd = commands.add_parser("simulate", help="seeded Monte Carlo tail estimate")
    simulate_cmd.add_argument("--n", type=int)
    simulate_cmd.add_argument("--beta", type=float, default=2.0)
    _add_threshold_flags(simulate_cmd)
    simulate_cmd.add_argument("--stat", choices=sorted(_STATS), default="running-max")
    simulate_cmd.add_argument("--dist", default="rademacher")
    simulate_cmd.add_argument("--trials", type=int, default=10**6)
    simulate_cmd.add_argument("--seed", type=int, default=0)
    simulate_cmd.set_defaults(func=cmd_simulate)

    sweep = commands.add_parser("sweep", help="bound/oracle/Monte Carlo table over a grid")
    sweep.add_argument("--n", required=True, help="comma-separated list, e.g. 4,8,16")
    sweep.add_argument("--beta", default="2", help="comma-separated list")
    sweep.add_argument("--s", required=True, help="comma-separated ascending list in (0,1]")
    sweep.add_argument("--stat", choices=sorted(_STATS), default="running-max")
    sweep.add_argument("--dist", default="rademacher")
    sweep.add_argument("--trials", type=int, default=10**4)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", help="output path; stdout when omitted")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.set_defaults(func=cmd_sweep)

    verify_cmd = commands.add_parser("verify", help="run every built-in invariant suite")
    verify_cmd.add_argument("--fast", action="store_true", help="about 10x smaller grids")
    verify_cmd.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
