"""Monte Carlo harness: sweep allocators over (n, m) grids and aggregate
success/envy-free rates with Wilson confidence intervals.

Reproducibility contract: the seed of trial t for algorithm a at grid point
(n, m) is derive_key(master_seed, n, m, algorithm id, t). Trials are
therefore independent tasks; worker count and execution order cannot change
any result, and extending the trial count preserves the existing records.
Aggregates are computed from integer counts, and the CSV/JSON emitters
format floats with shortest-round-trip decimals, so reruns are
byte-identical.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .allocators import (
    BruteForceResult,
    TauMode,
    brute_force_ef_exists,
    select_tau,
    threshold_matching,
    threshold_matching_with_removal,
    verify_removal_certificates,
    welfare_maximizing,
)
from .core import Allocation, Instance, generate_instance, is_balanced, is_envy_free
from .distributions import DistributionSpec
from .rng import derive_key

ALGORITHMS = ("welfare_max", "alg1", "alg2", "brute_force")
_ALG_ID = {name: idx for idx, name in enumerate(ALGORITHMS)}

OUTCOME_EF = "ef_allocation"
OUTCOME_NULL = "null"
OUTCOME_NON_EF = "non_ef_allocation"

CSV_HEADER = "n,m,r,dist,algorithm,tau_mode,trials,success_rate,ef_rate,ci_low,ci_high,mean_removals,master_seed"

_WILSON_Z = 1.959963984540054  # two-sided 95%


class ExperimentError(ValueError):
    """Invalid sweep configuration."""


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """Wilson score interval; well-behaved at rates near 0 and 1."""
    if trials < 1:
        raise ExperimentError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = phat + z * z / (2 * trials)
    spread = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
    # clamping keeps the interval inside [0, 1] and around the point
    # estimate despite rounding at the boundaries
    low = min(max(0.0, (center - spread) / denom), phat)
    high = max(min(1.0, (center + spread) / denom), phat)
    return low, high


@dataclass(frozen=True)
class SweepConfig:
    grid: tuple[tuple[int, int], ...]
    dist: DistributionSpec
    trials: int
    algorithms: tuple[str, ...]
    tau_mode: TauMode
    master_seed: int
    brute_cap: int = 10**7

    def __post_init__(self):
        if self.trials < 1:
            raise ExperimentError("trials must be at least 1")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ExperimentError(f"unknown algorithm {name!r}")
        for n, m in self.grid:
            if n < 1 or m < 0:
                raise ExperimentError(f"bad grid point ({n}, {m})")

    def to_json_dict(self) -> dict:
        return {
            "schema": "v1",
            "grid": [[n, m] for n, m in self.grid],
            "dist": self.dist.to_json_dict(),
            "trials": self.trials,
            "algorithms": list(self.algorithms),
            "tau_mode": self.tau_mode.to_json_dict(),
            "master_seed": self.master_seed,
            "brute_cap": self.brute_cap,
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "SweepConfig":
        return SweepConfig(
            grid=tuple((int(n), int(m)) for n, m in doc["grid"]),
            dist=DistributionSpec.from_json_dict(doc["dist"]),
            trials=int(doc["trials"]),
            algorithms=tuple(doc["algorithms"]),
            tau_mode=TauMode.from_json_dict(doc.get("tau_mode", {})),
            master_seed=int(doc["master_seed"]),
            brute_cap=int(doc.get("brute_cap", 10**7)),
        )


def default_config() -> SweepConfig:
    """The shipped desk-scale grid: minutes of total runtime."""
    grid = tuple(
        (n, int(n * ratio))
        for n in (20, 50, 100)
        for ratio in (1, 1.5, 2, 3, 5)
    )
    return SweepConfig(
        grid=grid,
        dist=DistributionSpec.uniform(),
        trials=500,
        algorithms=("welfare_max", "alg1", "alg2"),
        tau_mode=TauMode(mode="quantile", kappa=2.0),
        master_seed=20240001,
        brute_cap=10**7,
    )


@dataclass(frozen=True)
class TrialRecord:
    n: int
    m: int
    r: int
    algorithm: str
    trial_index: int
    seed: int
    outcome: str
    removals: int
    runtime_ns: int


def eligible(algorithm: str, n: int, m: int, brute_cap: int) -> bool:
    """Whether an algorithm is schedulable at a grid point."""
    if algorithm == "welfare_max":
        return True
    if algorithm == "brute_force":
        return n**m <= brute_cap
    if m == 0 or m % n != 0:
        return False
    r = m // n
    return r >= 2 if algorithm == "alg2" else r >= 1


def run_trial(
    n: int,
    m: int,
    algorithm: str,
    trial_index: int,
    *,
    dist: DistributionSpec,
    tau_mode: TauMode,
    master_seed: int,
    brute_cap: int = 10**7,
) -> TrialRecord:
    """One audited trial; deterministic given its arguments."""
    seed = derive_key(master_seed, n, m, _ALG_ID[algorithm], trial_index)
    inst = generate_instance(n, m, dist, seed)
    started = time.perf_counter_ns()
    removals = 0
    alloc: Optional[Allocation] = None
    if algorithm == "welfare_max":
        alloc = welfare_maximizing(inst)
    elif algorithm == "brute_force":
        result = brute_force_ef_exists(inst, cap=brute_cap)
        alloc = result.witness if result.exists else None
    else:
        r = m // n
        tau = select_tau(inst, r, tau_mode).resolved_tau
        if algorithm == "alg1":
            alloc = threshold_matching(inst, r, tau)
        else:
            alloc, log = threshold_matching_with_removal(inst, r, tau)
            removals = len(log)
            report = verify_removal_certificates(inst, tau, r, log)
            if not report.all_certified:
                raise RuntimeError("internal error: removal log failed certification")
    runtime_ns = time.perf_counter_ns() - started
    if alloc is None:
        outcome = OUTCOME_NULL
    else:
        verdict = is_envy_free(inst, alloc)
        outcome = OUTCOME_EF if verdict.envy_free else OUTCOME_NON_EF
        if algorithm in ("alg1", "alg2") and not is_balanced(alloc, m // n):
            raise RuntimeError("internal error: matching allocation is not balanced")
    return TrialRecord(
        n=n,
        m=m,
        r=m // n if n else 0,
        algorithm=algorithm,
        trial_index=trial_index,
        seed=seed,
        outcome=outcome,
        removals=removals,
        runtime_ns=runtime_ns,
    )


@dataclass(frozen=True)
class SweepRow:
    n: int
    m: int
    r: int
    dist: str
    algorithm: str
    tau_mode: str
    trials: int
    successes: int
    ef_successes: int
    total_removals: int
    mean_runtime_ns: float

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def ef_rate(self) -> float:
        return self.ef_successes / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.ef_successes, self.trials)

    @property
    def mean_removals(self) -> float:
        return self.total_removals / self.trials


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow]
    records: list[TrialRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for row in self.rows:
            low, high = row.ci
            tau_label = row.tau_mode if row.algorithm in ("alg1", "alg2") else "-"
            lines.append(
                ",".join(
                    [
                        str(row.n),
                        str(row.m),
                        str(row.r),
                        row.dist,
                        row.algorithm,
                        tau_label,
                        str(row.trials),
                        repr(row.success_rate),
                        repr(row.ef_rate),
                        repr(low),
                        repr(high),
                        repr(row.mean_removals),
                        str(self.config.master_seed),
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        out = []
        for row in self.rows:
            low, high = row.ci
            out.append(
                {
                    "n": row.n,
                    "m": row.m,
                    "r": row.r,
                    "dist": row.dist,
                    "algorithm": row.algorithm,
                    "tau_mode": row.tau_mode if row.algorithm in ("alg1", "alg2") else "-",
                    "trials": row.trials,
                    "success_rate": row.success_rate,
                    "ef_rate": row.ef_rate,
                    "ci_low": low,
                    "ci_high": high,
                    "mean_removals": row.mean_removals,
                    "master_seed": self.config.master_seed,
                }
            )
        return {"schema": "v1", "rows": out}


def _run_cell(args: tuple) -> tuple[int, list[TrialRecord]]:
    index, n, m, algorithm, cfg_doc = args
    cfg = SweepConfig.from_json_dict(cfg_doc)
    records = [
        run_trial(
            n,
            m,
            algorithm,
            t,
            dist=cfg.dist,
            tau_mode=cfg.tau_mode,
            master_seed=cfg.master_seed,
            brute_cap=cfg.brute_cap,
        )
        for t in range(cfg.trials)
    ]
    return index, records


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Run every eligible (grid point, algorithm) cell.

    Cells run in parallel when workers > 1; aggregation is keyed by cell
    index, so the result is identical at any worker count.
    """
    cells = []
    for n, m in cfg.grid:
        for algorithm in cfg.algorithms:
            if eligible(algorithm, n, m, cfg.brute_cap):
                cells.append((len(cells), n, m, algorithm, cfg.to_json_dict()))
    results: dict[int, list[TrialRecord]] = {}
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, records in pool.map(_run_cell, cells):
                results[index] = records
    else:
        for cell in cells:
            index, records = _run_cell(cell)
            results[index] = records
    rows = []
    all_records = []
    for index, n, m, algorithm, _ in cells:
        records = results[index]
        all_records.extend(records)
        rows.append(
            SweepRow(
                n=n,
                m=m,
                r=m // n,
                dist=cfg.dist.label(),
                algorithm=algorithm,
                tau_mode=cfg.tau_mode.label(),
                trials=cfg.trials,
                successes=sum(rec.outcome != OUTCOME_NULL for rec in records),
                ef_successes=sum(rec.outcome == OUTCOME_EF for rec in records),
                total_removals=sum(rec.removals for rec in records),
                mean_runtime_ns=sum(rec.runtime_ns for rec in records) / len(records),
            )
        )
    return SweepResult(config=cfg, rows=rows, records=all_records)


@dataclass(frozen=True)
class CouponRow:
    m: int
    trials: int
    empty_agent_count: int
    ef_count: int

    @property
    def empty_agent_rate(self) -> float:
        return self.empty_agent_count / self.trials

    @property
    def ef_rate(self) -> float:
        return self.ef_count / self.trials

    @property
    def ef_ci(self) -> tuple[float, float]:
        return wilson_interval(self.ef_count, self.trials)


def coupon_experiment(
    n: int, m_values: list[int], trials: int, seed: int,
    dist: Optional[DistributionSpec] = None,
) -> list[CouponRow]:
    """Welfare maximization across m: how often is some agent left empty,
    and how often is the result envy-free. Requires a non-atomic spec."""
    if dist is None:
        dist = DistributionSpec.uniform()
    if dist.kind not in ("uniform", "truncated_normal"):
        raise ExperimentError("coupon experiment requires a non-atomic distribution")
    rows = []
    for m in m_values:
        empty = 0
        ef = 0
        for t in range(trials):
            trial_seed = derive_key(seed, n, m, _ALG_ID["welfare_max"], t)
            inst = generate_instance(n, m, dist, trial_seed)
            alloc = welfare_maximizing(inst)
            if int(alloc.bundle_sizes().min()) == 0:
                empty += 1
            if is_envy_free(inst, alloc).envy_free:
                ef += 1
        rows.append(CouponRow(m=m, trials=trials, empty_agent_count=empty, ef_count=ef))
    return rows


@dataclass(frozen=True)
class ContrastResult:
    """Envy-free existence probability when m is a multiple of n versus
    offset from it by ceil(n/2)."""

    n: int
    r: int
    trials: int
    m_divisible: int
    m_offset: int
    exists_divisible: int
    exists_offset: int

    @property
    def p_divisible(self) -> float:
        return self.exists_divisible / self.trials

    @property
    def p_offset(self) -> float:
        return self.exists_offset / self.trials

    @property
    def ci_divisible(self) -> tuple[float, float]:
        return wilson_interval(self.exists_divisible, self.trials)

    @property
    def ci_offset(self) -> tuple[float, float]:
        return wilson_interval(self.exists_offset, self.trials)


def divisibility_contrast(
    n: int, r: int, trials: int, seed: int, cap: int = 10**7,
    dist: Optional[DistributionSpec] = None,
) -> ContrastResult:
    """Brute-force P[an envy-free allocation exists] at m = rn versus the
    half-offset point m = rn + floor(n/2), the remainder farthest from a
    multiple of n."""
    if dist is None:
        dist = DistributionSpec.uniform()
    m_div = r * n
    m_off = r * n + n // 2
    counts = {}
    for m in (m_div, m_off):
        if n**m > cap:
            raise ExperimentError(f"n**m = {n**m} exceeds cap {cap} at m = {m}")
        hits = 0
        for t in range(trials):
            trial_seed = derive_key(seed, n, m, _ALG_ID["brute_force"], t)
            inst = generate_instance(n, m, dist, trial_seed)
            if brute_force_ef_exists(inst, cap=cap).exists:
                hits += 1
        counts[m] = hits
    return ContrastResult(
        n=n,
        r=r,
        trials=trials,
        m_divisible=m_div,
        m_offset=m_off,
        exists_divisible=counts[m_div],
        exists_offset=counts[m_off],
    )
