"""Command-line front end.

Subcommands: gen (write an instance), solve (run an allocator), check
(audit an allocation for envy), oracle (exhaustive existence check), bounds
(closed-form thresholds and probability bounds), sweep (Monte Carlo grid),
certify (re-run the removal allocator and audit its removal log).

Files and stdout only. Every emitted JSON document carries "schema": "v1".
Agents and items are 0-indexed in all machine output. Exit codes: 0 success
(allocation found / envy-free / certified), 2 a structurally valid "no
result" (no matching, no envy-free allocation exists), 3 a failed verdict
(envy found, certification failed), 1 usage or data errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

from . import analysis
from .allocators import (
    AllocatorError,
    TauMode,
    ThresholdError,
    brute_force_ef_exists,
    constant_mode_tau,
    select_tau,
    threshold_matching,
    threshold_matching_with_removal,
    verify_removal_certificates,
    welfare_maximizing,
)
from .core import (
    Allocation,
    Instance,
    InstanceError,
    bundle_utility,
    generate_instance,
    is_envy_free,
    read_json,
    write_json,
)
from .distributions import (
    DistributionError,
    DistributionSpec,
    poly_bound_params,
    tail_prob,
)
from .experiments import SweepConfig, default_config, run_sweep

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NULL = 2
EXIT_VERDICT_FALSE = 3


class CliError(Exception):
    """A user-facing error: message printed to stderr, exit code 1."""


def parse_dist(text: str) -> DistributionSpec:
    """Accept 'uniform', 'staircase', 'truncated_normal:MU,SIGMA', or inline JSON."""
    text = text.strip()
    if text.startswith("{"):
        return DistributionSpec.from_json_dict(json.loads(text))
    if text in ("uniform", "staircase"):
        return DistributionSpec(text)
    if text.startswith("truncated_normal:"):
        body = text.split(":", 1)[1]
        parts = body.split(",")
        if len(parts) != 2:
            raise CliError("expected truncated_normal:MU,SIGMA")
        return DistributionSpec.truncated_normal(float(parts[0]), float(parts[1]))
    raise CliError(f"cannot parse distribution {text!r}")


def _tau_mode_from_args(args) -> TauMode:
    if args.tau_mode == "fixed":
        if args.tau is None:
            raise CliError("fixed tau mode requires --tau")
        return TauMode(mode="fixed", tau=args.tau)
    if args.tau_mode == "constant":
        return TauMode(mode="constant", c=args.c)
    return TauMode(mode="quantile", kappa=args.kappa)


def _load_instance(path: str) -> Instance:
    try:
        return Instance.from_json_dict(read_json(path))
    except (OSError, json.JSONDecodeError, InstanceError, DistributionError, ValueError) as exc:
        raise CliError(f"cannot load instance {path}: {exc}")


def _emit(doc: dict, out: Optional[str]):
    text = write_json(doc, out)
    if out is None:
        print(text)


def cmd_gen(args) -> int:
    dist = parse_dist(args.dist)
    inst = generate_instance(args.n, args.m, dist, args.seed)
    _emit(inst.to_json_dict(), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    doc: dict = {"schema": "v1", "algorithm": args.alg, "tau": None, "removals": []}
    if args.alg == "wmax":
        alloc = welfare_maximizing(inst)
    else:
        if args.r is None:
            raise CliError("--r is required for alg1/alg2")
        mode = _tau_mode_from_args(args)
        choice = select_tau(inst, args.r, mode)
        doc["tau"] = choice.resolved_tau
        if args.alg == "alg1":
            alloc = threshold_matching(inst, args.r, choice.resolved_tau)
        else:
            alloc, log = threshold_matching_with_removal(inst, args.r, choice.resolved_tau)
            doc["removals"] = log.to_lists()
    if alloc is None:
        doc["status"] = "null"
        doc["owner"] = None
        _emit(doc, args.out)
        return EXIT_NULL
    doc["status"] = "allocation"
    doc["owner"] = alloc.owner.tolist()
    _emit(doc, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    try:
        alloc = Allocation.from_json_dict(read_json(args.allocation), n_agents=inst.n)
    except (OSError, json.JSONDecodeError, InstanceError, ValueError) as exc:
        raise CliError(f"cannot load allocation {args.allocation}: {exc}")
    if alloc.m != inst.m:
        raise CliError(f"allocation covers {alloc.m} items but instance has {inst.m}")
    verdict = is_envy_free(inst, alloc)
    agents = []
    for i in range(inst.n):
        own = bundle_utility(inst, i, alloc.bundle(i).tolist())
        worst = None
        worst_deficit = 0.0
        for j in range(inst.n):
            if j == i:
                continue
            deficit = bundle_utility(inst, i, alloc.bundle(j).tolist()) - own
            if worst is None or deficit > worst_deficit:
                worst = j
                worst_deficit = deficit
        agents.append({"agent": i, "max_deficit": worst_deficit, "worst_rival": worst})
    doc = {
        "schema": "v1",
        "envy_free": verdict.envy_free,
        "witness": None
        if verdict.envy_free
        else {"envier": verdict.envier, "envied": verdict.envied, "deficit": verdict.deficit},
        "agents": agents,
    }
    _emit(doc, args.out)
    return EXIT_OK if verdict.envy_free else EXIT_VERDICT_FALSE


def cmd_oracle(args) -> int:
    inst = _load_instance(args.instance)
    result = brute_force_ef_exists(inst, cap=args.cap)
    doc = {
        "schema": "v1",
        "exists": result.exists,
        "count": result.count,
        "witness": result.witness.owner.tolist() if result.witness is not None else None,
    }
    _emit(doc, args.out)
    return EXIT_OK if result.exists else EXIT_NULL


def cmd_certify(args) -> int:
    inst = _load_instance(args.instance)
    mode = _tau_mode_from_args(args)
    choice = select_tau(inst, args.r, mode)
    alloc, log = threshold_matching_with_removal(inst, args.r, choice.resolved_tau)
    report = verify_removal_certificates(inst, choice.resolved_tau, args.r, log)
    doc = {
        "schema": "v1",
        "status": "allocation" if alloc is not None else "null",
        "tau": choice.resolved_tau,
        "tau_certificate": report.certificate_tau,
        "degenerate_threshold": report.degenerate_threshold,
        "certified": report.all_certified,
        "entries": [
            {
                "agent": d.entry.agent,
                "item": d.entry.item,
                "rival": d.entry.rival,
                "step": d.entry.step,
                "certified": d.certified,
                "certifier": d.certifier,
                "intersection_size": d.intersection_size,
            }
            for d in report.details
        ],
    }
    _emit(doc, args.out)
    return EXIT_OK if report.all_certified else EXIT_VERDICT_FALSE


def cmd_bounds(args) -> int:
    dist = parse_dist(args.dist)
    n, m = args.n, args.m
    if n < 1 or m < 1:
        raise CliError("need n >= 1 and m >= 1")
    doc: dict = {"schema": "v1", "n": n, "m": m, "dist": dist.to_json_dict(), "epsilon": args.epsilon}

    params = None
    try:
        params = poly_bound_params(dist)
        doc["poly_bound"] = {
            "theta_lower": params.theta_lower,
            "theta_upper": params.theta_upper,
            "q": params.q,
        }
    except DistributionError as exc:
        doc["poly_bound"] = None
        doc["poly_bound_reason"] = str(exc)

    tau_block: dict = {"constant": None, "quantile": None}
    if params is not None:
        entry: dict = {"c": args.c}
        try:
            tau = constant_mode_tau(n, m, params, args.c)
            entry.update({"tau": tau, "tau_certificate": analysis.certificate_threshold(tau), "error": None})
        except ThresholdError as exc:
            entry.update({"tau": None, "tau_certificate": None, "error": str(exc)})
        tau_block["constant"] = entry
    # population counterpart of the empirical quantile rule: invert the
    # analytic tail at probability kappa*log(m)/n
    target = args.kappa * math.log(m) / n if m > 1 else 0.0
    entry = {"kappa": args.kappa}
    if target <= 0.0 or target >= 1.0:
        entry.update({"tau": None, "error": "edge probability outside (0, 1) at this scale"})
    else:
        entry.update({"tau": _invert_tail(dist, target), "error": None})
    tau_block["quantile"] = entry
    doc["tau"] = tau_block

    if params is not None:
        doc["certificate_density_constant"] = analysis.certificate_density_constant(
            params.q, params.theta_upper, params.theta_lower
        )
    else:
        doc["certificate_density_constant"] = None

    r = m // n
    doc["r_floor"] = r
    doc["no_envy_base"] = analysis.no_envy_base(1.0, 1.0, r) if r >= 1 else None

    theta = min(params.theta_lower, 1.0) if params is not None else None
    if params is None:
        doc["nonexistence"] = None
        doc["nonexistence_reason"] = "no analytic polynomial bound available"
    elif m % n == 0:
        doc["nonexistence"] = None
        doc["nonexistence_reason"] = "remainder is 0 (m divisible by n)"
    elif r < 1 or n < 2:
        doc["nonexistence"] = None
        doc["nonexistence_reason"] = "need m > n >= 2"
    else:
        p = analysis.NonExistenceBoundParams(
            n=n, m=m, r=r, theta=theta, q=params.q, epsilon=args.epsilon
        )
        per = analysis.per_allocation_ef_bound(p)
        glob = analysis.global_nonexistence_bound(p)
        doc["nonexistence"] = {
            "remainder": p.remainder,
            "theta": theta,
            "no_envy_base": analysis.no_envy_base(theta, params.q, r),
            "per_allocation_log": per.log_main,
            "per_allocation_min_form_log": per.log_min_form,
            "per_allocation_epsilon_form_log": per.log_epsilon_form,
            "epsilon_range_ok": per.epsilon_range_ok,
            "global_log": glob.log_bound,
            "scale_threshold_log": glob.log_threshold,
            "holds_at_scale": glob.holds_at_scale,
        }

    c = analysis.nonexistence_constant(args.epsilon, theta if theta is not None else 1.0, params.q if params is not None else 1.0)
    doc["nonexistence_constant"] = c
    doc["max_admissible_r"] = analysis.max_admissible_r(n, c) if n >= 3 else None
    doc["coupon_threshold"] = analysis.coupon_threshold(n) if n >= 2 else None
    _emit(doc, args.out)
    return EXIT_OK


def _invert_tail(dist: DistributionSpec, p: float) -> float:
    """Largest tau with Pr[u > tau] >= p, via bisection on the analytic tail."""
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if mid >= 1.0:
            break
        if tail_prob(dist, 1.0 - mid) >= p:
            lo = mid
        else:
            hi = mid
    return lo


def cmd_sweep(args) -> int:
    if args.default_config:
        print(write_json(default_config().to_json_dict(), None))
        return EXIT_OK
    if args.config is None:
        raise CliError("--config is required (or use --default-config)")
    try:
        cfg = SweepConfig.from_json_dict(read_json(args.config))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise CliError(f"cannot load sweep config {args.config}: {exc}")
    result = run_sweep(cfg, workers=args.workers)
    if args.out_csv:
        with open(args.out_csv, "w") as fh:
            fh.write(result.to_csv())
    if args.out_json:
        write_json(result.to_json_dict(), args.out_json)
    if not args.out_csv and not args.out_json:
        sys.stdout.write(result.to_csv())
    return EXIT_OK


def _add_tau_flags(parser):
    parser.add_argument("--tau-mode", choices=("quantile", "constant", "fixed"), default="quantile")
    parser.add_argument("--tau", type=float, default=None, help="threshold for fixed mode")
    parser.add_argument("--kappa", type=float, default=2.0, help="quantile-mode density multiplier")
    parser.add_argument("--c", type=float, default=64.0, help="constant-mode coefficient")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="envyalloc",
        description="Envy-free allocation under random additive utilities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--dist", default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run an allocator on an instance file")
    p.add_argument("instance")
    p.add_argument("--alg", choices=("wmax", "alg1", "alg2"), required=True)
    p.add_argument("--r", type=int, default=None)
    _add_tau_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="audit an allocation for envy")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="exhaustive envy-free existence check")
    p.add_argument("instance")
    p.add_argument("--cap", type=int, default=10**7)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bounds", help="closed-form thresholds and bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--dist", default="uniform")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--c", type=float, default=64.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep from a config file")
    p.add_argument("--config", default=None)
    p.add_argument("--out-csv", default=None)
    p.add_argument("--out-json", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--default-config", action="store_true", help="print the shipped desk-scale config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("certify", help="re-run the removal allocator and audit its removal log")
    p.add_argument("instance")
    p.add_argument("--r", type=int, required=True)
    _add_tau_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_certify)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (AllocatorError, InstanceError, DistributionError, analysis.AnalysisError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
