"""Allocation procedures for random additive utilities.

Three allocators:

* ``welfare_maximizing``: each item to the agent valuing it most.
* ``threshold_matching``: build the graph of (agent, item) pairs with
  utility >= tau and return the allocation induced by a perfect r-matching,
  or None when the graph has none.
* ``threshold_matching_with_removal``: same, but first prune each agent's
  candidate items until no rival values the top r of them more than r*tau in
  total. Any allocation this returns is envy-free and balanced by
  construction: every agent clears r*tau on her own bundle while no rival
  can clear it on hers. A post-check enforces this and raises on violation
  (which would indicate a bug, never an expected outcome).

Also here: the threshold selector, the removed-edge certificate auditor, and
the exhaustive envy-free existence oracle used to validate everything else.

Tie-breaking is always by lowest index (item or agent); ties have
probability zero under continuous utility distributions, so no guarantee is
affected, and fixing them makes runs reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from .core import Allocation, Instance, InstanceError, is_balanced, is_envy_free
from .distributions import PolyBoundParams, poly_bound_params
from .analysis import certificate_threshold


class AllocatorError(ValueError):
    """Invalid allocator inputs (dimensions, thresholds, caps)."""


class ThresholdError(AllocatorError):
    """The requested threshold rule resolves outside (0, 1)."""


class PostCheckError(RuntimeError):
    """Internal error: an allocation that must be envy-free and balanced is not."""


TAU_MODES = ("constant", "quantile", "fixed")
DEFAULT_CONSTANT_C = 64.0
DEFAULT_QUANTILE_KAPPA = 2.0


@dataclass(frozen=True)
class TauMode:
    """A threshold rule: how to pick tau for a given instance and r.

    * ``constant``: tau = 1 - (c * log(m) / (theta_lower * n))**(1/q) using
      the instance distribution's polynomial tail parameters. The guarantee-
      grade constant is c = 64; it pushes tau below 0 at desk scales, so the
      practical default is the quantile rule.
    * ``quantile``: tau = the empirical (1 - kappa * log(m) / n)-quantile of
      the n*m utilities, giving per-edge probability ~ kappa * log(m) / n.
      The level is clamped into [0, 1].
    * ``fixed``: tau passed through unchanged.
    """

    mode: str = "quantile"
    c: float = DEFAULT_CONSTANT_C
    kappa: float = DEFAULT_QUANTILE_KAPPA
    tau: Optional[float] = None

    def __post_init__(self):
        if self.mode not in TAU_MODES:
            raise AllocatorError(f"tau mode must be one of {TAU_MODES}, got {self.mode!r}")
        if self.mode == "fixed" and self.tau is None:
            raise AllocatorError("fixed mode requires tau")

    def label(self) -> str:
        if self.mode == "constant":
            return f"constant(c={self.c!r})"
        if self.mode == "quantile":
            return f"quantile(kappa={self.kappa!r})"
        return f"fixed(tau={self.tau!r})"

    def to_json_dict(self) -> dict:
        doc: dict = {"mode": self.mode}
        if self.mode == "constant":
            doc["c"] = self.c
        elif self.mode == "quantile":
            doc["kappa"] = self.kappa
        else:
            doc["tau"] = self.tau
        return doc

    @staticmethod
    def from_json_dict(doc: dict) -> "TauMode":
        mode = doc.get("mode", "quantile")
        return TauMode(
            mode=mode,
            c=float(doc.get("c", DEFAULT_CONSTANT_C)),
            kappa=float(doc.get("kappa", DEFAULT_QUANTILE_KAPPA)),
            tau=doc.get("tau"),
        )


@dataclass(frozen=True)
class TauChoice:
    """A resolved threshold: the rule plus the tau it produced."""

    mode: TauMode
    resolved_tau: float

    def __post_init__(self):
        if not (0.0 < self.resolved_tau < 1.0):
            raise ThresholdError(f"resolved tau {self.resolved_tau} outside (0, 1)")


def constant_mode_tau(n: int, m: int, params: PolyBoundParams, c: float = DEFAULT_CONSTANT_C) -> float:
    """1 - (c * log(m) / (theta_lower * n))**(1/q); raises if outside (0, 1)."""
    if m < 1 or n < 1:
        raise AllocatorError("need n >= 1 and m >= 1")
    if c <= 0:
        raise AllocatorError("c must be positive")
    inner = c * math.log(m) / (params.theta_lower * n)
    if inner >= 1.0:
        raise ThresholdError(
            f"threshold non-positive: n too small for this constant "
            f"(c*log(m)/(theta_lower*n) = {inner:.6g} >= 1)"
        )
    tau = 1.0 - inner ** (1.0 / params.q)
    if tau >= 1.0:
        raise ThresholdError("threshold degenerate at 1 (m = 1)")
    return tau


def select_tau(
    inst: Instance,
    r: int,
    mode: TauMode = TauMode(),
    params: Optional[PolyBoundParams] = None,
) -> TauChoice:
    """Resolve a threshold rule on an instance with m = r*n items."""
    if r < 1 or inst.m != r * inst.n:
        raise AllocatorError(f"m = {inst.m} must equal r * n = {r * inst.n}")
    if mode.mode == "fixed":
        return TauChoice(mode=mode, resolved_tau=float(mode.tau))
    if mode.mode == "constant":
        if params is None:
            params = poly_bound_params(inst.dist)
        return TauChoice(mode=mode, resolved_tau=constant_mode_tau(inst.n, inst.m, params, mode.c))
    level = 1.0 - mode.kappa * math.log(inst.m) / inst.n
    level = min(1.0, max(0.0, level))
    flat = np.sort(inst.utilities, axis=None)
    tau = float(flat[math.floor(level * (flat.size - 1))])
    return TauChoice(mode=mode, resolved_tau=tau)


def welfare_maximizing(inst: Instance) -> Allocation:
    """Each item to the agent with the highest utility for it (ties: lowest agent)."""
    owner = np.argmax(inst.utilities, axis=0).astype(np.int32)
    return Allocation(owner=owner, n_agents=inst.n)


def _solve_threshold_graph(keep: np.ndarray, r: int, n: int, m: int) -> Optional[Allocation]:
    counts = keep.sum(axis=1, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int32)
    indptr[1:] = np.cumsum(counts)
    indices = np.nonzero(keep)[1].astype(np.int32)
    owner = _backend.kernels.solve_r_matching(indptr, indices, n, m, r)
    if owner is None:
        return None
    return Allocation(owner=owner, n_agents=n)


def threshold_matching(inst: Instance, r: int, tau: float) -> Optional[Allocation]:
    """Allocation induced by a perfect r-matching of the >= tau graph, or None."""
    if r < 1 or inst.m != r * inst.n:
        raise AllocatorError(f"m = {inst.m} must equal r * n = {r * inst.n}")
    if not (0.0 < tau < 1.0):
        raise AllocatorError("tau must lie in (0, 1)")
    keep = inst.utilities >= tau
    return _solve_threshold_graph(keep, r, inst.n, inst.m)


@dataclass(frozen=True)
class RemovalEntry:
    """One pruned candidate edge: ``rival`` triggered removal of ``item``
    from ``agent``'s candidate set at global step ``step``."""

    agent: int
    item: int
    rival: int
    step: int


@dataclass
class RemovalLog:
    """The pruning trace of one threshold-matching-with-removal run."""

    entries: list[RemovalEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def to_lists(self) -> list[list[int]]:
        return [[e.agent, e.item, e.rival, e.step] for e in self.entries]

    @staticmethod
    def from_lists(rows: list[list[int]]) -> "RemovalLog":
        entries = [RemovalEntry(int(a), int(j), int(p), int(s)) for a, j, p, s in rows]
        seen = set()
        for e in entries:
            if (e.agent, e.item) in seen:
                raise AllocatorError(f"edge ({e.agent}, {e.item}) removed twice")
            seen.add((e.agent, e.item))
        return RemovalLog(entries=entries)


def removal_phase(inst: Instance, r: int, tau: float) -> tuple[np.ndarray, RemovalLog]:
    """Run only the pruning pass; returns (candidate mask after pruning, log)."""
    keep, raw = _backend.kernels.removal_phase(inst.utilities, r, tau)
    entries = [
        RemovalEntry(agent=int(a), item=int(j), rival=int(p), step=s)
        for s, (a, j, p) in enumerate(raw.tolist())
    ]
    return keep.astype(bool), RemovalLog(entries=entries)


def threshold_matching_with_removal(
    inst: Instance, r: int, tau: float
) -> tuple[Optional[Allocation], RemovalLog]:
    """Prune candidate sets, then match; any returned allocation is envy-free
    and balanced (enforced by a post-check)."""
    if r < 2:
        raise AllocatorError("the removal variant requires r >= 2")
    if inst.m != r * inst.n:
        raise AllocatorError(f"m = {inst.m} must equal r * n = {r * inst.n}")
    if not (0.0 < tau < 1.0):
        raise AllocatorError("tau must lie in (0, 1)")
    keep, log = removal_phase(inst, r, tau)
    alloc = _solve_threshold_graph(keep, r, inst.n, inst.m)
    if alloc is not None:
        verdict = is_envy_free(inst, alloc)
        if not verdict.envy_free:
            raise PostCheckError(
                f"internal error: output allocation has envy "
                f"(agent {verdict.envier} envies agent {verdict.envied} by {verdict.deficit})"
            )
        if not is_balanced(alloc, r):
            raise PostCheckError("internal error: output allocation is not balanced")
    return alloc, log


@dataclass(frozen=True)
class CertificateDetail:
    entry: RemovalEntry
    certified: bool
    certifier: Optional[int]
    intersection_size: int


@dataclass
class CertificateReport:
    """Audit of a removal log against the dense-overlap guarantee.

    Every removed edge (i, j) must lie, together with some rival i', in a
    common candidate block of the strictly-above-(3*tau - 2) graph of width
    more than 2r/3. ``degenerate_threshold`` flags 3*tau - 2 <= 0, where the
    check holds vacuously because every utility clears it.
    """

    all_certified: bool
    tau: float
    certificate_tau: float
    degenerate_threshold: bool
    log: RemovalLog
    certified_mask: np.ndarray
    certifiers: np.ndarray
    intersection_sizes: np.ndarray

    @property
    def details(self) -> list[CertificateDetail]:
        return [
            CertificateDetail(
                entry=entry,
                certified=bool(self.certified_mask[k]),
                certifier=int(self.certifiers[k]) if self.certifiers[k] >= 0 else None,
                intersection_size=int(self.intersection_sizes[k]),
            )
            for k, entry in enumerate(self.log.entries)
        ]


def verify_removal_certificates(
    inst: Instance, tau: float, r: int, log: RemovalLog
) -> CertificateReport:
    """Check each removed edge sits in a wide common block above 3*tau - 2.

    The certifying rival may be any agent; the one that triggered the
    removal is tried first, then the rest in ascending order.
    """
    tau_cert = certificate_threshold(tau)
    above = inst.utilities > tau_cert
    k = len(log.entries)
    if k == 0:
        empty = np.empty(0, dtype=np.int64)
        return CertificateReport(
            all_certified=True,
            tau=tau,
            certificate_tau=tau_cert,
            degenerate_threshold=tau_cert <= 0.0,
            log=log,
            certified_mask=empty.astype(bool),
            certifiers=empty,
            intersection_sizes=empty,
        )
    agents = np.fromiter((e.agent for e in log.entries), np.int64, count=k)
    items = np.fromiter((e.item for e in log.entries), np.int64, count=k)
    rivals = np.fromiter((e.rival for e in log.entries), np.int64, count=k)
    if agents.min() < 0 or agents.max() >= inst.n or items.min() < 0 or items.max() >= inst.m:
        raise AllocatorError("removal entry names an agent or item out of range")
    rivals_ok = (rivals >= 0) & (rivals < inst.n) & (rivals != agents)
    # pairwise candidate-overlap sizes; counts are exact in float64
    above_f = above.astype(np.float64)
    sizes = (above_f @ above_f.T).astype(np.int64)
    wide = 3 * sizes > 2 * r
    safe_rivals = np.where(rivals_ok, rivals, 0)
    certified = (
        rivals_ok
        & above[agents, items]
        & above[safe_rivals, items]
        & wide[agents, safe_rivals]
    )
    certifiers = np.where(certified, rivals, -1)
    inter_sizes = np.where(certified, sizes[agents, safe_rivals], 0)
    for pos in np.flatnonzero(~certified):
        i, j = int(agents[pos]), int(items[pos])
        if not above[i, j]:
            continue
        candidates = np.flatnonzero(above[:, j] & wide[i])
        candidates = candidates[candidates != i]
        if candidates.size:
            ip = int(candidates[0])
            certified[pos] = True
            certifiers[pos] = ip
            inter_sizes[pos] = sizes[i, ip]
    return CertificateReport(
        all_certified=bool(certified.all()),
        tau=tau,
        certificate_tau=tau_cert,
        degenerate_threshold=tau_cert <= 0.0,
        log=log,
        certified_mask=certified,
        certifiers=certifiers,
        intersection_sizes=inter_sizes,
    )


class CapExceeded(AllocatorError):
    """The enumeration space n**m exceeds the allowed cap."""


@dataclass(frozen=True)
class BruteForceResult:
    exists: bool
    count: int
    witness: Optional[Allocation]


def brute_force_ef_exists(inst: Instance, cap: int = 10**7) -> BruteForceResult:
    """Exhaustively enumerate all n**m owner sequences.

    Returns whether any allocation is envy-free, how many are, and the
    lexicographically first one as a witness.
    """
    total = inst.n**inst.m
    if total > cap:
        raise CapExceeded(f"n**m = {total} exceeds cap {cap}")
    count, witness_owner = _backend.kernels.brute_force_count(inst.utilities)
    witness = None
    if witness_owner is not None:
        witness = Allocation(owner=witness_owner, n_agents=inst.n)
    return BruteForceResult(exists=count > 0, count=int(count), witness=witness)
