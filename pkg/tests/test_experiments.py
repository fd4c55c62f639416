import dataclasses
import math

import pytest

from envyalloc import (
    DistributionSpec,
    SweepConfig,
    TauMode,
    coupon_experiment,
    divisibility_contrast,
    run_sweep,
    run_trial,
    wilson_interval,
)
from envyalloc.experiments import CSV_HEADER, default_config, eligible

UNIFORM = DistributionSpec.uniform()


def tiny_config(**overrides) -> SweepConfig:
    base = dict(
        grid=((2, 2), (3, 6), (4, 5)),
        dist=UNIFORM,
        trials=20,
        algorithms=("welfare_max", "alg1", "alg2", "brute_force"),
        tau_mode=TauMode(mode="fixed", tau=0.6),
        master_seed=4242,
        brute_cap=10**6,
    )
    base.update(overrides)
    return SweepConfig(**base)


class TestWilson:
    @pytest.mark.parametrize("successes,trials", [(0, 10), (10, 10), (3, 7), (1, 1000)])
    def test_interval_contains_rate(self, successes, trials):
        low, high = wilson_interval(successes, trials)
        rate = successes / trials
        assert 0.0 <= low <= rate <= high <= 1.0

    def test_shrinks_with_trials(self):
        w1 = wilson_interval(5, 10)
        w2 = wilson_interval(500, 1000)
        assert (w2[1] - w2[0]) < (w1[1] - w1[0])


class TestRunTrial:
    def test_single_agent_wmax_always_ef(self):
        for t in range(5):
            rec = run_trial(1, 4, "welfare_max", t, dist=UNIFORM,
                            tau_mode=TauMode(), master_seed=1)
            assert rec.outcome == "ef_allocation"

    def test_null_outcome_propagates(self):
        # threshold far above every utility leaves the graph empty
        rec = run_trial(4, 8, "alg2", 0, dist=UNIFORM,
                        tau_mode=TauMode(mode="fixed", tau=0.999999), master_seed=5)
        assert rec.outcome == "null"
        assert rec.removals >= 0

    def test_deterministic_modulo_runtime(self):
        a = run_trial(3, 6, "alg2", 7, dist=UNIFORM,
                      tau_mode=TauMode(mode="fixed", tau=0.7), master_seed=99)
        b = run_trial(3, 6, "alg2", 7, dist=UNIFORM,
                      tau_mode=TauMode(mode="fixed", tau=0.7), master_seed=99)
        strip = lambda rec: dataclasses.replace(rec, runtime_ns=0)
        assert strip(a) == strip(b)

    def test_brute_force_outcomes(self):
        rec = run_trial(2, 2, "brute_force", 0, dist=UNIFORM,
                        tau_mode=TauMode(), master_seed=123)
        assert rec.outcome in ("ef_allocation", "null")


class TestEligibility:
    def test_brute_cap(self):
        assert eligible("brute_force", 2, 3, brute_cap=10)
        assert not eligible("brute_force", 2, 10, brute_cap=10)

    def test_divisibility(self):
        assert not eligible("alg1", 2, 5, brute_cap=10**7)
        assert eligible("alg1", 2, 2, brute_cap=10**7)
        assert not eligible("alg2", 2, 2, brute_cap=10**7)  # needs r >= 2
        assert eligible("alg2", 2, 4, brute_cap=10**7)

    def test_wmax_always(self):
        assert eligible("welfare_max", 7, 3, brute_cap=1)


class TestRunSweep:
    def test_rates_with_one_trial(self):
        result = run_sweep(tiny_config(trials=1))
        for row in result.rows:
            assert row.success_rate in (0.0, 1.0)
            assert row.ef_rate in (0.0, 1.0)
            low, high = row.ci
            assert 0.0 <= low <= row.ef_rate <= high <= 1.0

    def test_empty_grid(self):
        result = run_sweep(tiny_config(grid=()))
        assert result.rows == [] and result.records == []

    def test_doubling_trials_extends_records(self):
        small = run_sweep(tiny_config(trials=10))
        big = run_sweep(tiny_config(trials=20))
        strip = lambda rec: dataclasses.replace(rec, runtime_ns=0)
        small_keys = {(r.n, r.m, r.algorithm) for r in small.records}
        for key in small_keys:
            a = [strip(r) for r in small.records if (r.n, r.m, r.algorithm) == key]
            b = [strip(r) for r in big.records if (r.n, r.m, r.algorithm) == key][: len(a)]
            assert a == b

    def test_ineligible_cells_skipped(self):
        result = run_sweep(tiny_config(grid=((4, 5),)))
        algorithms = {row.algorithm for row in result.rows}
        assert "alg1" not in algorithms and "alg2" not in algorithms
        assert "welfare_max" in algorithms

    def test_csv_shape(self):
        result = run_sweep(tiny_config(trials=3))
        lines = result.to_csv().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + len(result.rows)
        for line in lines[1:]:
            assert len(line.split(",")) == len(CSV_HEADER.split(","))

    def test_csv_identical_across_worker_counts(self):
        cfg = tiny_config(trials=8)
        seq = run_sweep(cfg, workers=1)
        par = run_sweep(cfg, workers=3)
        assert seq.to_csv() == par.to_csv()
        assert seq.to_json_dict() == par.to_json_dict()

    def test_config_round_trip(self):
        cfg = tiny_config()
        assert SweepConfig.from_json_dict(cfg.to_json_dict()) == cfg

    def test_default_config_valid(self):
        cfg = default_config()
        assert cfg.trials >= 1 and len(cfg.grid) == 15


class TestCoupon:
    def test_pigeonhole(self):
        rows = coupon_experiment(2, [1], trials=50, seed=3)
        assert rows[0].empty_agent_rate == 1.0

    def test_empty_rate_nonincreasing_in_m(self):
        rows = coupon_experiment(6, [6, 12, 24, 48], trials=400, seed=17)
        rates = [row.empty_agent_rate for row in rows]
        for a, b in zip(rates, rates[1:]):
            se = math.sqrt(max(a * (1 - a), 0.25 / 400) / 400)
            assert b <= a + 4 * se

    def test_empty_agent_implies_envy(self):
        rows = coupon_experiment(5, [5], trials=200, seed=23)
        row = rows[0]
        # with positive utilities an empty-handed agent always envies
        assert row.ef_count <= row.trials - row.empty_agent_count

    def test_rejects_atomic_spec(self):
        with pytest.raises(Exception):
            coupon_experiment(3, [3], trials=5, seed=1, dist=DistributionSpec.staircase())


class TestDivisibilityContrast:
    def test_single_agent(self):
        res = divisibility_contrast(1, 2, trials=30, seed=9)
        assert res.p_divisible == 1.0 and res.p_offset == 1.0

    def test_offset_points(self):
        res = divisibility_contrast(2, 1, trials=10, seed=9)
        assert (res.m_divisible, res.m_offset) == (2, 3)
        res = divisibility_contrast(3, 2, trials=10, seed=9)
        assert (res.m_divisible, res.m_offset) == (6, 7)

    def test_cap_enforced(self):
        with pytest.raises(Exception):
            divisibility_contrast(3, 2, trials=5, seed=9, cap=100)

    def test_cis_bracket_estimates(self):
        res = divisibility_contrast(2, 1, trials=200, seed=31)
        lo, hi = res.ci_divisible
        assert lo <= res.p_divisible <= hi
