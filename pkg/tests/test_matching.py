import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from envyalloc import (
    BipartiteGraph,
    DimensionMismatch,
    GraphError,
    RMatching,
    find_perfect_r_matching,
    hall_violation_search,
    validate_r_matching,
)
from envyalloc.rng import Stream

from conftest import random_mask


def complete(left, right):
    return BipartiteGraph(left, right, tuple(tuple(range(right)) for _ in range(left)))


class TestSolver:
    def test_complete_graph(self):
        g = complete(2, 4)
        m = find_perfect_r_matching(g, 2)
        assert m is not None
        assert validate_r_matching(g, m, 2)

    def test_uncoverable_item(self):
        g = BipartiteGraph(2, 4, ((0, 1, 2), (0, 1, 2)))
        assert find_perfect_r_matching(g, 2) is None

    def test_hall_violation_blocks(self):
        # both agents can only take items {0, 1}: |N(S)| = 2 < r|S| = 4
        g = BipartiteGraph(2, 4, ((0, 1), (0, 1)))
        assert find_perfect_r_matching(g, 2) is None
        assert hall_violation_search(g, 2) == (0, 1)

    def test_dimension_mismatch_is_an_error(self):
        with pytest.raises(DimensionMismatch):
            find_perfect_r_matching(complete(2, 5), 2)

    def test_deterministic(self):
        stream = Stream(31)
        for k in range(20):
            mask = random_mask(4, 8, 0.6, stream, k)
            g = BipartiteGraph.from_edge_mask(mask)
            a = find_perfect_r_matching(g, 2)
            b = find_perfect_r_matching(g, 2)
            if a is None:
                assert b is None
            else:
                assert a.assignment == b.assignment


class TestHallOracle:
    def test_complete_has_no_violation(self):
        assert hall_violation_search(complete(2, 4), 2) is None

    def test_single_agent_with_r_neighbors(self):
        g = BipartiteGraph(1, 3, ((0, 1, 2),))
        assert hall_violation_search(g, 3) is None

    def test_left_count_limit(self):
        with pytest.raises(GraphError):
            hall_violation_search(complete(21, 21), 1)

    def test_reports_violating_subset(self):
        g = BipartiteGraph(3, 6, ((0,), (0,), (0, 1, 2, 3, 4, 5)))
        s = hall_violation_search(g, 2)
        assert s is not None
        nbrs = set()
        for i in s:
            nbrs.update(g.adjacency[i])
        assert len(nbrs) < 2 * len(s)


class TestValidate:
    def test_round_trip(self):
        g = complete(3, 6)
        m = find_perfect_r_matching(g, 2)
        assert validate_r_matching(g, m, 2)

    def test_reused_item(self):
        g = complete(2, 4)
        bad = RMatching(assignment=((0, 1), (1, 2)))
        assert not validate_r_matching(g, bad, 2)

    def test_foreign_edge(self):
        g = BipartiteGraph(2, 4, ((0, 1), (0, 1, 2, 3)))
        bad = RMatching(assignment=((0, 2), (1, 3)))
        assert not validate_r_matching(g, bad, 2)

    def test_wrong_degree(self):
        g = complete(2, 4)
        assert not validate_r_matching(g, RMatching(assignment=((0,), (1, 2))), 2)


class TestOracleEquivalence:
    def test_random_graphs(self):
        # solver existence agrees with the exhaustive Hall scan whenever
        # right_count = r * left_count
        stream = Stream(8080)
        index = 0
        checked = 0
        for p in (0.2, 0.5, 0.8):
            for left in range(1, 7):
                for r in (1, 2, 3):
                    right = r * left
                    if right > 12:
                        continue
                    for _ in range(25):
                        mask = random_mask(left, right, p, stream, index)
                        index += 1
                        g = BipartiteGraph.from_edge_mask(mask)
                        matching = find_perfect_r_matching(g, r)
                        violation = hall_violation_search(g, r)
                        assert (matching is not None) == (violation is None)
                        if matching is not None:
                            assert validate_r_matching(g, matching, r)
                        checked += 1
        assert checked >= 900

    @given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=5),
           st.integers(min_value=1, max_value=2))
    @settings(max_examples=80, deadline=None)
    def test_hypothesis_equivalence(self, seed, left, r):
        mask = random_mask(left, r * left, 0.5, Stream(seed), 0)
        g = BipartiteGraph.from_edge_mask(mask)
        assert (find_perfect_r_matching(g, r) is not None) == (
            hall_violation_search(g, r) is None
        )


class TestGraphBasics:
    def test_adjacency_validation(self):
        with pytest.raises(GraphError):
            BipartiteGraph(1, 3, ((2, 1),))
        with pytest.raises(GraphError):
            BipartiteGraph(1, 3, ((0, 3),))

    def test_debug_dump(self):
        g = BipartiteGraph(2, 3, ((0, 2), ()))
        assert g.debug_dump() == "0: 0 2\n1: "

    def test_csr(self):
        g = BipartiteGraph(2, 3, ((0, 2), (1,)))
        indptr, indices = g.csr()
        assert indptr.tolist() == [0, 2, 3]
        assert indices.tolist() == [0, 2, 1]
