"""Closed-form evaluators for the thresholds, constants, and probability
bounds behind the allocators.

All probability bounds are computed and reported in natural-log space:
quantities like n**(-2m) underflow doubles immediately. Inequality checks
("bound holds") are reported as booleans alongside both sides' logs; they
are statements about upper bounds, never estimates of actual probabilities.
Logarithms are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class AnalysisError(ValueError):
    """Parameters outside an evaluator's domain."""


def certificate_threshold(tau: float) -> float:
    """The lower threshold 3*tau - 2 used when auditing removed edges.

    May be negative for tau < 2/3; callers handle that (every utility then
    clears it vacuously).
    """
    if not (0.0 < tau <= 1.0):
        raise AnalysisError("tau must lie in (0, 1]")
    return 3.0 * tau - 2.0


def certificate_density_constant(q: float, theta_upper: float, theta_lower: float) -> float:
    """3**q * 64 * theta_upper / theta_lower: scales the edge density of the
    certificate-threshold graph relative to log(m)/n."""
    if q <= 0 or theta_upper <= 0 or theta_lower <= 0:
        raise AnalysisError("all parameters must be positive")
    return 3.0**q * 64.0 * theta_upper / theta_lower


def no_envy_base_log(theta: float, q: float, r: int) -> float:
    """log of the per-block no-envy factor (see ``no_envy_base``)."""
    if not (0.0 < theta <= 1.0):
        raise AnalysisError("theta must lie in (0, 1]")
    if q < 1:
        raise AnalysisError("q must be at least 1")
    if r < 1:
        raise AnalysisError("r must be at least 1")
    # x = (theta / (r+1)**q) ** (r+1), kept in log space to survive large r
    log_x = (r + 1) * (math.log(theta) - q * math.log(r + 1))
    x = math.exp(log_x)
    return 0.25 * math.log1p(-x)


def no_envy_base(theta: float, q: float, r: int) -> float:
    """The fourth root of 1 - (theta / (r+1)**q)**(r+1), in [0, 1).

    An agent holding at most r items fails to envy an agent holding z > r
    items with probability at most this value raised to z/r; it is the base
    of every non-existence bound below. Strictly increasing in r and q,
    strictly decreasing in theta.
    """
    return math.exp(no_envy_base_log(theta, q, r))


@dataclass(frozen=True)
class NonExistenceBoundParams:
    """Inputs for the non-existence bounds; requires rn + 1 <= m <= (r+1)n - 1."""

    n: int
    m: int
    r: int
    theta: float
    q: float
    epsilon: float

    def __post_init__(self):
        if self.n < 2:
            raise AnalysisError("need at least two agents")
        if self.r < 1:
            raise AnalysisError("r must be at least 1")
        if not (0.0 < self.theta <= 1.0):
            raise AnalysisError("theta must lie in (0, 1]")
        if self.q < 1:
            raise AnalysisError("q must be at least 1")
        if not (0.0 < self.epsilon < 1.0):
            raise AnalysisError("epsilon must lie in (0, 1)")
        if not (1 <= self.remainder <= self.n - 1):
            raise AnalysisError(
                f"m = {self.m} must lie in [rn + 1, (r+1)n - 1] = "
                f"[{self.r * self.n + 1}, {(self.r + 1) * self.n - 1}]"
            )

    @property
    def remainder(self) -> int:
        """The remainder m - rn, in [1, n - 1]."""
        return self.m - self.r * self.n


@dataclass(frozen=True)
class PerAllocationBound:
    """Log-space bounds on the probability a fixed allocation is envy-free.

    ``log_main`` is the strongest form, exponent remainder*(n-remainder) /
    (r*(r+1)); the two weaker chained forms replace the exponent by
    n*min(remainder, n-remainder) / (2r(r+1)) and n**(1+epsilon) / (2r(r+1)).
    The epsilon form is only valid when ``epsilon_range_ok`` (the remainder
    stays n**epsilon away from both 0 and n).
    """

    log_main: float
    log_min_form: float
    log_epsilon_form: float
    epsilon_range_ok: bool


def per_allocation_ef_bound(p: NonExistenceBoundParams) -> PerAllocationBound:
    """Bound the probability that one fixed allocation is envy-free."""
    log_base = no_envy_base_log(p.theta, p.q, p.r)
    ell = p.remainder
    denom = p.r * (p.r + 1)
    short_side = min(ell, p.n - ell)
    return PerAllocationBound(
        log_main=(ell * (p.n - ell) / denom) * log_base,
        log_min_form=(p.n * short_side / (2 * denom)) * log_base,
        log_epsilon_form=(p.n ** (1.0 + p.epsilon) / (2 * denom)) * log_base,
        epsilon_range_ok=p.n**p.epsilon <= short_side,
    )


@dataclass(frozen=True)
class GlobalBound:
    """Union bound over all n**m allocations, in log space.

    ``holds_at_scale`` records whether the per-allocation bound is at most
    n**(-2m) (in which case the global bound is at most n**(-m)).
    """

    log_bound: float
    log_per_allocation: float
    log_threshold: float
    holds_at_scale: bool


def global_nonexistence_bound(p: NonExistenceBoundParams) -> GlobalBound:
    """log(n**m * per-allocation bound) plus the n**(-2m) comparison."""
    per = per_allocation_ef_bound(p)
    log_threshold = -2.0 * p.m * math.log(p.n)
    return GlobalBound(
        log_bound=p.m * math.log(p.n) + per.log_main,
        log_per_allocation=per.log_main,
        log_threshold=log_threshold,
        holds_at_scale=per.log_main <= log_threshold,
    )


def nonexistence_constant(epsilon: float, theta: float, q: float) -> float:
    """The constant c = 0.1 * epsilon * theta / q governing admissible r."""
    if not (0.0 < epsilon < 1.0):
        raise AnalysisError("epsilon must lie in (0, 1)")
    if not (0.0 < theta <= 1.0):
        raise AnalysisError("theta must lie in (0, 1]")
    if q < 1:
        raise AnalysisError("q must be at least 1")
    return 0.1 * epsilon * theta / q


def max_admissible_r(n: int, c: float) -> int:
    """floor(c * log(n) / log(log(n))): the largest r the non-existence
    result covers at this n; 0 means no r is admissible at this scale."""
    if n < 3:
        raise AnalysisError("need n >= 3 for a positive log log n")
    if c <= 0:
        raise AnalysisError("c must be positive")
    return math.floor(c * math.log(n) / math.log(math.log(n)))


def coupon_threshold(n: int) -> float:
    """n * log(n): the item count below which welfare maximization leaves
    some agent empty-handed with high probability."""
    if n < 2:
        raise AnalysisError("need at least two agents")
    return n * math.log(n)
