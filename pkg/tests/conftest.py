import numpy as np
import pytest

from envyalloc import DistributionSpec, Instance, generate_instance
from envyalloc.rng import Stream


def make_instance(utilities, seed=0, dist=None) -> Instance:
    """Wrap a literal utility matrix in an Instance."""
    u = np.asarray(utilities, dtype=np.float64)
    return Instance(
        n=u.shape[0],
        m=u.shape[1],
        utilities=u,
        seed=seed,
        dist=dist or DistributionSpec.uniform(),
    )


def random_mask(left: int, right: int, p: float, stream: Stream, index: int) -> np.ndarray:
    """Deterministic Bernoulli(p) edge mask from one stream draw block."""
    flat = stream.uniform_block(index * left * right, left * right)
    return (flat < p).reshape(left, right)


def planted_instance(n: int, r: int, seed: int, tau: float) -> Instance:
    """Uniform instance with each agent's own r-item block lifted above tau.

    Gives the threshold-matching allocators a regime where the pruning pass
    fires yet allocations are still frequently found.
    """
    u = generate_instance(n, n * r, DistributionSpec.uniform(), seed).utilities.copy()
    for i in range(n):
        block = slice(i * r, (i + 1) * r)
        u[i, block] = tau + (1.0 - tau) * u[i, block]
    return Instance(n=n, m=n * r, utilities=u, seed=seed, dist=DistributionSpec.uniform())


@pytest.fixture
def uniform_spec():
    return DistributionSpec.uniform()
