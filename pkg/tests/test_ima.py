"""Partition-set generation, budget policies, and the schedulability sweep."""

import random
from fractions import Fraction

import pytest

from membw import AnalysisStatus, BudgetInterval, MemorySchedule, analyze_dynamic
from membw.errors import InvariantError
from membw.ima import (
    POLICIES,
    ExperimentConfig,
    SweepConfig,
    SweepPoint,
    evaluate_schedulability,
    generate_partition_set,
    policy_dy,
    policy_se,
    policy_su,
    preset_sweep,
    rows_to_csv,
    run_sweep,
    split_budget_by_weights,
)

CFG = ExperimentConfig(m=4, mir=Fraction(1, 4), u=Fraction(1, 2))


def _set(seed: int = 42, config: ExperimentConfig = CFG):
    return generate_partition_set(config, random.Random(seed))


class TestGeneration:
    def test_shape(self):
        pset = _set()
        assert len(pset.partitions) == 16
        for core in range(1, 5):
            assert len(pset.by_core(core)) == 4

    def test_per_core_utilization_is_exact(self):
        pset = _set()
        for core in range(1, 5):
            assert sum(p.util for p in pset.by_core(core)) == Fraction(1, 2)

    def test_high_mode_count(self):
        pset = _set()
        high = [p for p in pset.partitions if p.mi >= Fraction(1, 2)]
        low = [p for p in pset.partitions if p.mi <= Fraction(1, 10)]
        assert len(high) == 4  # round(0.25 * 16)
        assert len(high) + len(low) == 16

    def test_demands_positive(self):
        pset = _set()
        for p in pset.partitions:
            assert p.execution >= 1
            assert p.memory >= 0

    def test_demand_arithmetic(self):
        pset = _set(7)
        slot = CFG.slot
        for p in pset.partitions:
            demand = p.util * CFG.hyperperiod / slot
            assert p.execution == max(1, int(demand * (1 - p.mi) + Fraction(1, 2)))
            assert p.memory == int(demand * p.mi + Fraction(1, 2))

    def test_same_seed_same_set(self):
        assert _set(99) == _set(99)

    def test_different_seeds_differ(self):
        assert _set(1) != _set(2)

    def test_odd_high_count_rounds(self):
        cfg = ExperimentConfig(m=8, mir=Fraction(15, 100), u=Fraction(1, 4))
        pset = generate_partition_set(cfg, random.Random(5))
        high = [p for p in pset.partitions if p.mi >= Fraction(1, 2)]
        assert len(high) == 5  # round(0.15 * 32) = round(4.8)


class TestBudgetSplitting:
    def test_even_policy_remainder_to_low_cores(self):
        assert policy_se(CFG).budgets == (10417, 10417, 10416, 10416)

    def test_even_policy_m8(self):
        cfg = ExperimentConfig(m=8, mir=Fraction(1, 4), u=Fraction(1, 2))
        budgets = policy_se(cfg).budgets
        assert sum(budgets) == 41666
        assert budgets == (5209, 5209, 5208, 5208, 5208, 5208, 5208, 5208)

    def test_weighted_split_sums_to_total(self):
        vec = split_budget_by_weights(41666, [Fraction(1, 100), Fraction(49, 100), Fraction(13, 100), Fraction(37, 100)])
        assert sum(vec.budgets) == 41666
        assert all(b >= 1 for b in vec.budgets)
        # Proportional within the rounding unit.
        assert vec.budgets[1] > vec.budgets[3] > vec.budgets[2] > vec.budgets[0]

    def test_all_zero_weights_falls_back_to_even(self):
        vec = split_budget_by_weights(10, [Fraction(0), Fraction(0)])
        assert vec.budgets == (5, 5)

    def test_too_small_total_rejected(self):
        with pytest.raises(InvariantError):
            split_budget_by_weights(1, [Fraction(1), Fraction(1)])

    def test_su_vector_shape(self):
        vec = policy_su(_set(), CFG)
        assert sum(vec.budgets) == 41666
        assert all(b >= 1 for b in vec.budgets)


class TestDynamicPolicy:
    def test_initial_vector_matches_su(self):
        pset = _set(3)
        outcome = policy_dy(pset, CFG)
        if outcome.schedule is not None:
            assert outcome.schedule.intervals[0].budgets == policy_su(pset, CFG)

    def test_schedule_intervals_are_valid_vectors(self):
        outcome = policy_dy(_set(3), CFG)
        assert outcome.schedulable
        for interval in outcome.schedule.intervals:
            assert sum(interval.budgets.budgets) == 41666
            assert all(b >= 1 for b in interval.budgets.budgets)

    def test_active_cores_never_drop_below_initial_share(self):
        pset = _set(3)
        outcome = policy_dy(pset, CFG)
        assert outcome.schedulable
        base = outcome.schedule.intervals[0].budgets
        # Reconstruct which cores are still active at each interval boundary
        # from the completion events.
        events = sorted(set(outcome.completions.values()))
        finished_at = {}
        for pid, t in outcome.completions.items():
            core = next(p.core for p in pset.partitions if p.id == pid)
            finished_at.setdefault(core, []).append(t)
        done_after = {core: max(ts) for core, ts in finished_at.items() if len(ts) == 4}
        start = 0
        for interval in outcome.schedule.intervals:
            for core in range(1, CFG.m + 1):
                if core not in done_after or start < done_after[core]:
                    assert interval.budgets.budget_of(core) >= base.budget_of(core)
            if interval.length is None:
                break
            start += interval.length

    def test_completions_match_reanalysis_of_built_schedule(self):
        # Soundness of the event construction: every recorded completion must
        # equal what the analyzer says when run over the final as-built
        # schedule from the partition's actual start period.
        pset = _set(3)
        outcome = policy_dy(pset, CFG)
        assert outcome.schedulable
        reg = CFG.regulation
        horizon = CFG.hyperperiod_periods
        for core in range(1, CFG.m + 1):
            start = 0
            for part in pset.by_core(core):
                view = _tail(outcome.schedule, start)
                res = analyze_dynamic(part.workload((horizon - start) * CFG.period), view, core, reg)
                assert res.status is AnalysisStatus.CONVERGED
                assert start + res.span == outcome.completions[part.id]
                start += res.span
            assert start <= horizon

    def test_unschedulable_set_reports_no_schedule(self):
        cfg = ExperimentConfig(m=4, mir=Fraction(1, 4), u=Fraction(95, 100))
        outcome = policy_dy(generate_partition_set(cfg, random.Random(3)), cfg)
        assert not outcome.schedulable
        assert outcome.schedule is None

    def test_dominates_static_uneven_on_sample(self):
        wins = ties = losses = 0
        cfg = ExperimentConfig(m=4, mir=Fraction(1, 4), u=Fraction(55, 100))
        for seed in range(25):
            pset = generate_partition_set(cfg, random.Random(seed))
            su = evaluate_schedulability(pset, "SU", cfg)
            dy = evaluate_schedulability(pset, "DY", cfg)
            wins += dy and not su
            losses += su and not dy
            ties += su == dy
        assert losses == 0


def _tail(schedule: MemorySchedule, start: int) -> MemorySchedule:
    """The suffix of a schedule beginning ``start`` periods in."""
    remaining = start
    intervals = []
    for interval in schedule.intervals:
        if not intervals and interval.length is not None:
            if remaining >= interval.length:
                remaining -= interval.length
                continue
            if remaining:
                intervals.append(BudgetInterval(budgets=interval.budgets, length=interval.length - remaining))
                remaining = 0
                continue
        intervals.append(interval)
    return MemorySchedule(intervals=tuple(intervals))


class TestEvaluation:
    def test_policies_agree_on_trivial_load(self):
        cfg = ExperimentConfig(m=4, mir=Fraction(1, 4), u=Fraction(1, 100))
        pset = generate_partition_set(cfg, random.Random(0))
        for policy in POLICIES:
            assert evaluate_schedulability(pset, policy, cfg)

    def test_all_policies_fail_overload(self):
        cfg = ExperimentConfig(m=4, mir=Fraction(1, 4), u=Fraction(99, 100))
        pset = generate_partition_set(cfg, random.Random(0))
        for policy in POLICIES:
            assert not evaluate_schedulability(pset, policy, cfg)

    def test_unknown_policy_rejected(self):
        with pytest.raises(InvariantError):
            evaluate_schedulability(_set(), "XX", CFG)


class TestSweep:
    def test_rows_cover_grid_in_order(self):
        sweep = SweepConfig(
            points=(SweepPoint(m=4, mir=Fraction(1, 4), sets=2),),
            u_values=(Fraction(1, 10), Fraction(1, 2)),
            seed=3,
        )
        rows = run_sweep(sweep)
        assert [(r.policy, float(r.u)) for r in rows] == [
            ("SE", 0.1), ("SU", 0.1), ("DY", 0.1),
            ("SE", 0.5), ("SU", 0.5), ("DY", 0.5),
        ]
        assert all(r.total == 2 for r in rows)

    def test_sweep_is_deterministic(self):
        sweep = preset_sweep("smoke", seed=7)
        assert rows_to_csv(run_sweep(sweep), 7) == rows_to_csv(run_sweep(sweep), 7)

    def test_csv_shape(self):
        sweep = SweepConfig(
            points=(SweepPoint(m=4, mir=Fraction(1, 4), sets=1),),
            u_values=(Fraction(1, 10),),
            seed=5,
        )
        text = rows_to_csv(run_sweep(sweep), 5)
        lines = text.strip().splitlines()
        assert lines[0] == "# seed=5"
        assert lines[2] == "policy,m,MIr,U,schedulable,total,ratio,seed"
        assert len(lines) == 3 + 3  # header + one row per policy

    def test_presets(self):
        assert [p.m for p in preset_sweep("vary-m", 1).points] == [4, 8, 12]
        mirs = [p.mir for p in preset_sweep("vary-mir", 1).points]
        assert mirs == [Fraction(15 + 5 * k, 100) for k in range(8)]
        assert len(preset_sweep("smoke", 1).u_values) == 3
        with pytest.raises(InvariantError):
            preset_sweep("bogus", 1)

    def test_worker_env_parsing(self, monkeypatch):
        from membw.ima import _worker_count

        monkeypatch.setenv("MEMBW_THREADS", "3")
        assert _worker_count() == 3
        monkeypatch.setenv("MEMBW_THREADS", "zero")
        with pytest.raises(InvariantError):
            _worker_count()
