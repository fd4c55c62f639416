"""Instances, allocations, and the basic fairness predicates.

Agents and items are 0-indexed everywhere in code and in machine-readable
JSON; human-readable diagnostics label them 1-indexed. Envy comparisons are
exact (no tolerance): utilities are doubles, bundle sums are accumulated in
ascending item order, and every code path (including the compiled kernels
and the brute-force oracle) follows the same summation order so verdicts
agree bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import _backend
from .distributions import DistributionSpec, sample_block
from .rng import Stream

SCHEMA_VERSION = "v1"


class InstanceError(ValueError):
    """Malformed instance or allocation data."""


@dataclass
class Instance:
    """An n x m utility matrix plus the provenance needed to regenerate it."""

    n: int
    m: int
    utilities: np.ndarray
    seed: int
    dist: DistributionSpec

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("need at least one agent")
        if self.m < 0:
            raise InstanceError("item count must be nonnegative")
        u = np.ascontiguousarray(self.utilities, dtype=np.float64)
        if u.shape != (self.n, self.m):
            raise InstanceError(f"utilities shape {u.shape} != ({self.n}, {self.m})")
        if self.m and (np.min(u) < 0.0 or np.max(u) > 1.0):
            raise InstanceError("utilities must lie in [0, 1]")
        u.setflags(write=False)
        self.utilities = u

    def to_json_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "dist": self.dist.to_json_dict(),
            "utilities": self.utilities.tolist(),
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "Instance":
        _check_schema(doc)
        for key in ("n", "m", "utilities"):
            if key not in doc:
                raise InstanceError(f"instance document missing {key!r}")
        dist = DistributionSpec.from_json_dict(doc["dist"]) if "dist" in doc else DistributionSpec.uniform()
        return Instance(
            n=int(doc["n"]),
            m=int(doc["m"]),
            utilities=np.array(doc["utilities"], dtype=np.float64).reshape(int(doc["n"]), int(doc["m"])),
            seed=int(doc.get("seed", 0)),
            dist=dist,
        )


@dataclass
class Allocation:
    """A partition of the items: owner[j] is the agent holding item j."""

    owner: np.ndarray
    n_agents: int

    def __post_init__(self):
        o = np.ascontiguousarray(self.owner, dtype=np.int32)
        if o.ndim != 1:
            raise InstanceError("owner must be a flat sequence")
        if o.size and (o.min() < 0 or o.max() >= self.n_agents):
            raise InstanceError("owner entries must name agents in [0, n)")
        o.setflags(write=False)
        self.owner = o

    @property
    def m(self) -> int:
        return int(self.owner.size)

    def bundle(self, agent: int) -> np.ndarray:
        """Items held by ``agent``, in ascending order."""
        return np.flatnonzero(self.owner == agent)

    def bundle_sizes(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=self.n_agents)

    def to_json_dict(self) -> dict:
        return {"schema": SCHEMA_VERSION, "owner": self.owner.tolist()}

    @staticmethod
    def from_json_dict(doc: dict, n_agents: int) -> "Allocation":
        _check_schema(doc)
        if "owner" not in doc:
            raise InstanceError("allocation document missing 'owner'")
        return Allocation(owner=np.array(doc["owner"], dtype=np.int32), n_agents=n_agents)


def _check_schema(doc: dict):
    if not isinstance(doc, dict):
        raise InstanceError("expected a JSON object")
    version = doc.get("schema", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InstanceError(f"unsupported schema version {version!r}")


def generate_instance(n: int, m: int, dist: DistributionSpec, seed: int) -> Instance:
    """Draw an n x m utility matrix; entry (i, j) is draw i*m+j of the seed's stream."""
    if n < 1:
        raise InstanceError("need at least one agent")
    if m < 0:
        raise InstanceError("item count must be nonnegative")
    stream = Stream(seed, stream_id=0)
    flat = sample_block(dist, stream, 0, n * m)
    return Instance(n=n, m=m, utilities=flat.reshape(n, m), seed=seed, dist=dist)


def bundle_utility(inst: Instance, agent: int, items: Iterable[int]) -> float:
    """Sum of the agent's utilities over ``items`` (a set; empty sum is 0).

    Accumulates in ascending item order, the shared convention for all bundle
    sums in this package.
    """
    if not (0 <= agent < inst.n):
        raise InstanceError(f"agent {agent} out of range")
    row = inst.utilities[agent]
    total = 0.0
    seen = set()
    for j in sorted(items):
        if not (0 <= j < inst.m):
            raise InstanceError(f"item {j} out of range")
        if j in seen:
            raise InstanceError(f"item {j} listed twice")
        seen.add(j)
        total += row[j]
    return total


@dataclass(frozen=True)
class EnvyResult:
    """Envy verdict with a maximally envious pair when envy exists.

    ``deficit`` is max over ordered pairs (i, j) of
    u_i(bundle_j) - u_i(bundle_i); positive means agent ``envier`` envies
    agent ``envied`` by that amount.
    """

    envy_free: bool
    envier: Optional[int]
    envied: Optional[int]
    deficit: float

    def __bool__(self) -> bool:
        return self.envy_free


def is_envy_free(inst: Instance, alloc: Allocation) -> EnvyResult:
    """Whether every agent weakly prefers her own bundle; exact comparison."""
    if alloc.n_agents != inst.n or alloc.m != inst.m:
        raise InstanceError("allocation does not match instance dimensions")
    if inst.n == 1:
        return EnvyResult(True, None, None, 0.0)
    envier, envied, deficit = _backend.kernels.max_envy(inst.utilities, alloc.owner)
    if deficit > 0.0:
        return EnvyResult(False, envier, envied, deficit)
    return EnvyResult(True, None, None, deficit)


def is_balanced(alloc: Allocation, r: int) -> bool:
    """True iff every agent holds exactly r items."""
    if r < 0:
        raise InstanceError("r must be nonnegative")
    return bool(np.all(alloc.bundle_sizes() == r))


def sum_top_r(values: Iterable[float], r: int) -> float:
    """Sum of the r largest elements (all of them if fewer than r).

    Summation runs over the values in descending order, matching the kernels.
    """
    if r < 0:
        raise InstanceError("r must be nonnegative")
    ordered = sorted(values, reverse=True)
    total = 0.0
    for v in ordered[:r]:
        total += v
    return total


def write_json(doc: dict, path: Optional[str]) -> str:
    """Serialize with shortest-round-trip decimals; write to path if given."""
    text = json.dumps(doc, indent=2)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
