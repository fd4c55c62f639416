"""Utility distributions on [0, 1].

Supports reproducible sampling (inverse transform on a counter-based uniform
stream), analytic tail probabilities Pr[u > 1 - alpha], quantiles, and the
polynomial tail-bound parameters (theta_lower, theta_upper, q) that sandwich
the tail as theta * alpha**q near 1.

Built-in kinds:

* ``uniform``: uniform on [0, 1].
* ``truncated_normal``: a normal(mu, sigma) conditioned on [0, 1], sampled by
  inverse CDF (exact, rejection-free).
* ``staircase``: the discrete negative example whose tail decays like
  2**(-i*i) at scale 2**(-i); its tail is *not* bounded below by any
  theta * alpha**q. Atoms sit at 1 - 2**-(i+1) for i = 0..40 with the
  residual mass folded into the last atom (beyond i ~ 32 the masses
  underflow double precision anyway), so that
  Pr[u > 1 - 2**-i] = 2**(-i*i) holds exactly.
* ``table``: an arbitrary discrete distribution given as (value, cumulative
  probability) pairs.

For the atomic kinds, ``tail_prob`` uses the strict comparison
Pr[u > 1 - alpha]; for continuous kinds strict vs. non-strict is immaterial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .rng import Stream


class DistributionError(ValueError):
    """Invalid distribution parameters or an unsupported request."""


_KINDS = ("uniform", "truncated_normal", "staircase", "table")
_STAIRCASE_LEVELS = 41  # atoms for i = 0..40; tail beyond is 2**-1681


@dataclass(frozen=True)
class DistributionSpec:
    """A sampleable utility distribution on [0, 1]."""

    kind: str
    mu: Optional[float] = None
    sigma: Optional[float] = None
    points: Optional[tuple[tuple[float, float], ...]] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DistributionError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "truncated_normal":
            if self.mu is None or self.sigma is None:
                raise DistributionError("truncated_normal requires mu and sigma")
            if not (self.sigma > 0) or not math.isfinite(self.sigma):
                raise DistributionError("sigma must be positive and finite")
            if not math.isfinite(self.mu):
                raise DistributionError("mu must be finite")
        elif self.mu is not None or self.sigma is not None:
            raise DistributionError(f"{self.kind} takes no mu/sigma")
        if self.kind == "table":
            if not self.points:
                raise DistributionError("table requires points")
            object.__setattr__(self, "points", tuple((float(v), float(c)) for v, c in self.points))
            values = [v for v, _ in self.points]
            cums = [c for _, c in self.points]
            if any(not (0.0 <= v <= 1.0) for v in values):
                raise DistributionError("table values must lie in [0, 1]")
            if any(values[i] >= values[i + 1] for i in range(len(values) - 1)):
                raise DistributionError("table values must be strictly increasing")
            if any(cums[i] > cums[i + 1] for i in range(len(cums) - 1)):
                raise DistributionError("cumulative probabilities must be nondecreasing")
            if any(not (0.0 <= c <= 1.0) for c in cums):
                raise DistributionError("cumulative probabilities must lie in [0, 1]")
            if cums[-1] != 1.0:
                raise DistributionError("cumulative probabilities must end at 1")
        elif self.points is not None:
            raise DistributionError(f"{self.kind} takes no points")

    @staticmethod
    def uniform() -> "DistributionSpec":
        return DistributionSpec("uniform")

    @staticmethod
    def truncated_normal(mu: float, sigma: float) -> "DistributionSpec":
        return DistributionSpec("truncated_normal", mu=float(mu), sigma=float(sigma))

    @staticmethod
    def staircase() -> "DistributionSpec":
        return DistributionSpec("staircase")

    @staticmethod
    def table(points: Sequence[tuple[float, float]]) -> "DistributionSpec":
        return DistributionSpec("table", points=tuple(points))

    def to_json_dict(self) -> dict:
        if self.kind == "truncated_normal":
            return {"kind": "truncated_normal", "mu": self.mu, "sigma": self.sigma}
        if self.kind == "table":
            return {"kind": "table", "points": [[v, c] for v, c in self.points]}
        return {"kind": self.kind}

    @staticmethod
    def from_json_dict(doc: dict) -> "DistributionSpec":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise DistributionError("distribution document must be an object with a 'kind'")
        kind = doc["kind"]
        if kind == "uniform":
            return DistributionSpec.uniform()
        if kind == "staircase":
            return DistributionSpec.staircase()
        if kind == "truncated_normal":
            return DistributionSpec.truncated_normal(doc["mu"], doc["sigma"])
        if kind == "table":
            return DistributionSpec.table([(p[0], p[1]) for p in doc["points"]])
        raise DistributionError(f"unknown distribution kind {kind!r}")

    def label(self) -> str:
        """Compact, deterministic string for result tables."""
        if self.kind == "truncated_normal":
            return f"truncated_normal({self.mu!r},{self.sigma!r})"
        if self.kind == "table":
            return f"table[{len(self.points)}]"
        return self.kind


@dataclass(frozen=True)
class PolyBoundParams:
    """Parameters sandwiching the tail: theta_lower*a**q <= Pr[u > 1-a] <= theta_upper*a**q."""

    theta_lower: float
    theta_upper: float
    q: float

    def __post_init__(self):
        if not (self.theta_lower > 0 and self.theta_upper > 0 and self.q > 0):
            raise DistributionError("polynomial bound parameters must be positive")
        if self.theta_lower > self.theta_upper:
            raise DistributionError("theta_lower must not exceed theta_upper")


@dataclass(frozen=True)
class _AtomTable:
    """Discrete carrier: atoms ``values`` (increasing) with exact tail sums.

    ``tail_from[k]`` is Pr[u >= values[k]]; an implicit 0 follows the end.
    Tails rather than cumulative probabilities are stored so that masses far
    below one ulp of 1.0 survive in double precision.
    """

    values: np.ndarray
    tail_from: np.ndarray

    @property
    def tail_after(self) -> np.ndarray:
        """Pr[u > values[k]] for each atom k."""
        return np.append(self.tail_from[1:], 0.0)


def _staircase_atoms() -> _AtomTable:
    i = np.arange(_STAIRCASE_LEVELS, dtype=np.float64)
    values = 1.0 - np.exp2(-(i + 1.0))
    tail_from = np.exp2(-(i * i))
    return _AtomTable(values=values, tail_from=tail_from)


def _table_atoms(spec: DistributionSpec) -> _AtomTable:
    values = np.array([v for v, _ in spec.points], dtype=np.float64)
    cums = np.array([c for _, c in spec.points], dtype=np.float64)
    tail_from = 1.0 - np.concatenate(([0.0], cums[:-1]))
    return _AtomTable(values=values, tail_from=tail_from)


_STAIRCASE = _staircase_atoms()


def _atoms(spec: DistributionSpec) -> _AtomTable:
    return _STAIRCASE if spec.kind == "staircase" else _table_atoms(spec)


def _tnorm_pieces(spec: DistributionSpec) -> tuple[float, float, float]:
    """(Phi(z_low), Phi(z_high), normalizing mass) for the [0, 1] truncation."""
    lo = ndtr((0.0 - spec.mu) / spec.sigma)
    hi = ndtr((1.0 - spec.mu) / spec.sigma)
    mass = hi - lo
    if mass <= 0.0:
        raise DistributionError("truncated_normal has no mass on [0, 1] at these parameters")
    return float(lo), float(hi), float(mass)


def quantile(spec: DistributionSpec, level) -> "float | np.ndarray":
    """Inverse CDF at ``level`` in [0, 1); accepts scalars or arrays.

    This is also the sampling transform: a sample is quantile(spec, U) for a
    uniform U.
    """
    u = np.asarray(level, dtype=np.float64)
    if np.any(u < 0.0) or np.any(u >= 1.0):
        raise DistributionError("quantile level must lie in [0, 1)")
    if spec.kind == "uniform":
        out = u
    elif spec.kind == "truncated_normal":
        lo, _, mass = _tnorm_pieces(spec)
        out = spec.mu + spec.sigma * ndtri(lo + u * mass)
        out = np.clip(out, 0.0, 1.0)
    else:
        # Atom k is selected iff 1-u falls in (Pr[x > v_k], Pr[x >= v_k]];
        # working on the tail side keeps masses below one ulp of 1.0 exact.
        atoms = _atoms(spec)
        idx = np.searchsorted(-atoms.tail_after, -(1.0 - u), side="right")
        out = atoms.values[idx]
    if np.isscalar(level) or getattr(level, "ndim", 0) == 0:
        return float(out)
    return out


def sample(spec: DistributionSpec, stream: Stream) -> float:
    """One draw from ``spec`` at the stream cursor (advances the cursor)."""
    return float(quantile(spec, stream.next_uniform()))


def sample_block(spec: DistributionSpec, stream: Stream, start: int, count: int) -> np.ndarray:
    """Draws at indices ``start .. start+count-1`` of the stream."""
    return np.asarray(quantile(spec, stream.uniform_block(start, count)), dtype=np.float64)


def tail_prob(spec: DistributionSpec, alpha: float) -> float:
    """Pr[u > 1 - alpha], analytically, for alpha in (0, 1]."""
    if not (0.0 < alpha <= 1.0):
        raise DistributionError("alpha must lie in (0, 1]")
    if spec.kind == "uniform":
        return float(alpha)
    if spec.kind == "truncated_normal":
        lo, hi, mass = _tnorm_pieces(spec)
        at = ndtr((1.0 - alpha - spec.mu) / spec.sigma)
        return float((hi - at) / mass)
    atoms = _atoms(spec)
    idx = int(np.searchsorted(atoms.values, 1.0 - alpha, side="right"))
    if idx >= len(atoms.values):
        return 0.0
    return float(atoms.tail_from[idx])


def density(spec: DistributionSpec, x: float) -> float:
    """Probability density at x, for the continuous kinds only."""
    if not (0.0 <= x <= 1.0):
        raise DistributionError("x must lie in [0, 1]")
    if spec.kind == "uniform":
        return 1.0
    if spec.kind == "truncated_normal":
        _, _, mass = _tnorm_pieces(spec)
        z = (x - spec.mu) / spec.sigma
        return math.exp(-0.5 * z * z) / (spec.sigma * mass * math.sqrt(2.0 * math.pi))
    raise DistributionError(f"{spec.kind} has no density")


def poly_bound_params(spec: DistributionSpec) -> PolyBoundParams:
    """Tail-bound parameters with q = 1 from density extremes on [0, 1].

    Only the kinds with densities bounded above and below on [0, 1] qualify;
    the staircase tail decays faster than every alpha**q, so it (and
    arbitrary tables) are rejected.
    """
    if spec.kind == "uniform":
        return PolyBoundParams(1.0, 1.0, 1.0)
    if spec.kind == "truncated_normal":
        lower = min(density(spec, 0.0), density(spec, 1.0))
        mode = min(max(spec.mu, 0.0), 1.0)
        upper = density(spec, mode)
        return PolyBoundParams(lower, upper, 1.0)
    raise DistributionError("no analytic polynomial bound available for this kind")


@dataclass(frozen=True)
class PolyBoundCheck:
    alpha: float
    tail: float
    lower_ok: bool
    upper_ok: bool


def verify_poly_bound(
    spec: DistributionSpec, params: PolyBoundParams, alpha_grid: Sequence[float]
) -> list[PolyBoundCheck]:
    """Check theta_lower*a**q <= tail_prob(a) <= theta_upper*a**q on a grid."""
    report = []
    for alpha in alpha_grid:
        t = tail_prob(spec, alpha)
        bound = alpha**params.q
        report.append(
            PolyBoundCheck(
                alpha=float(alpha),
                tail=t,
                lower_ok=t >= params.theta_lower * bound,
                upper_ok=t <= params.theta_upper * bound,
            )
        )
    return report
