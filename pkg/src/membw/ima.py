"""IMA partition-set generation, budget policies, and schedulability sweeps.

Models an avionics-style system: m cores, each running a fixed sequence of
time-partitioned applications ("partitions") inside a major cycle of H
seconds. Every partition is abstracted as one workload (E, mu) with deadline
H; a core's partitions execute back-to-back, each starting at its
predecessor's completion period. A partition set is schedulable under a
budget policy iff every core's last partition completes by H.

Policies:

* SE: the total budget is split evenly across cores, once.
* SU: split once at t = 0, proportionally to each core's memory pressure
  (sum mu / (sum mu + sum E) over its partitions).
* DY: starts from SU's split. At every partition completion, cores whose
  partitions have all finished drop to the 1-transaction floor, and the
  budget so freed is redistributed over the still-active cores in
  proportion to weights recomputed from the unfinished partitions'
  demands. An active core never holds less than its initial share, so the
  per-core stall bound can only improve on SU's. The interval boundaries
  of the resulting memory schedule are the completion events. Completions
  are hypothesized by analyzing each running partition against the
  schedule built so far plus the current vector extended indefinitely; the
  earliest hypothesis is the next event. Same-period completions collapse
  into a single event.

Generation per set: partition count 4m with round(MIr * 4m) in HIGH memory-
intensity mode; a random permutation assigns exactly 4 partitions per core;
per-core utilizations come from UUniFast (exact rational sum U); memory
intensity is drawn uniformly from the mode's range. Demands follow as
E = round(u * H * (1 - MI) / slot) clamped >= 1 and mu = round(u * H * MI / slot).
Draw order (one seeded generator per set): HIGH-mode sample, core
permutation, per-core UUniFast in core order, per-partition MI in id order.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from hashlib import blake2b

from .dynamic_analysis import analyze_dynamic
from .errors import InvariantError
from .results import AnalysisStatus
from .schedule import BudgetInterval, MemorySchedule, RegulationConfig, Workload
from .stall_curve import BudgetVector

POLICIES = ("SE", "SU", "DY")


@dataclass(frozen=True)
class Partition:
    """One IMA partition: an (E, mu) workload with deadline H."""

    id: int
    core: int
    mi: Fraction
    util: Fraction
    execution: int
    memory: int

    def workload(self, deadline: Fraction) -> Workload:
        return Workload(execution=self.execution, memory=self.memory, deadline=deadline)


@dataclass(frozen=True)
class PartitionSet:
    partitions: tuple[Partition, ...]

    def by_core(self, core: int) -> tuple[Partition, ...]:
        return tuple(p for p in self.partitions if p.core == core)


@dataclass(frozen=True)
class ExperimentConfig:
    """Generation parameters for one sweep point (fixed m, MIr, U)."""

    m: int
    mir: Fraction
    u: Fraction
    partitions_per_core: int = 4
    hyperperiod: Fraction = Fraction(128, 1000)
    period: Fraction = Fraction(1, 1000)
    q_total: int = 41666
    high_range: tuple[Fraction, Fraction] = (Fraction(1, 2), Fraction(99, 100))
    low_range: tuple[Fraction, Fraction] = (Fraction(1, 1000), Fraction(1, 10))

    def __post_init__(self) -> None:
        if self.m < 2:
            raise InvariantError("experiment config: m must be >= 2")
        if self.partitions_per_core < 1:
            raise InvariantError("experiment config: partitions_per_core must be >= 1")
        if not 0 <= self.mir <= 1:
            raise InvariantError("experiment config: MIr must lie in [0, 1]")
        if self.u <= 0:
            raise InvariantError("experiment config: U must be > 0")
        if self.q_total < self.m:
            raise InvariantError("experiment config: q_total must allow >= 1 transaction per core")
        if (self.hyperperiod / self.period).denominator != 1:
            raise InvariantError("experiment config: hyperperiod must be a whole number of periods")

    @property
    def hyperperiod_periods(self) -> int:
        return int(self.hyperperiod / self.period)

    @property
    def regulation(self) -> RegulationConfig:
        return RegulationConfig(period=self.period, l_max=self.period / self.q_total, q_total=self.q_total)

    @property
    def slot(self) -> Fraction:
        return self.period / self.q_total


def _round_half_up(x: Fraction) -> int:
    return int(x + Fraction(1, 2))


def _uunifast(rng: random.Random, n: int, total: Fraction) -> list[Fraction]:
    """n utilizations summing to ``total`` exactly (rational telescoping)."""
    utils: list[Fraction] = []
    remaining = total
    for i in range(n, 1, -1):
        nxt = remaining * Fraction(rng.random() ** (1.0 / (i - 1)))
        utils.append(remaining - nxt)
        remaining = nxt
    utils.append(remaining)
    return utils


def generate_partition_set(config: ExperimentConfig, rng: random.Random) -> PartitionSet:
    """Draw one partition set; see the module docstring for the draw order."""
    n = config.m * config.partitions_per_core
    high_count = _round_half_up(config.mir * n)
    high_ids = set(rng.sample(range(n), high_count))
    perm = list(range(n))
    rng.shuffle(perm)
    core_of = {pid: pos // config.partitions_per_core + 1 for pos, pid in enumerate(perm)}

    util_of: dict[int, Fraction] = {}
    for core in range(1, config.m + 1):
        members = sorted(pid for pid in range(n) if core_of[pid] == core)
        for pid, u in zip(members, _uunifast(rng, config.partitions_per_core, config.u)):
            util_of[pid] = u

    slot = config.slot
    partitions = []
    for pid in range(n):
        lo, hi = config.high_range if pid in high_ids else config.low_range
        mi = Fraction(rng.uniform(float(lo), float(hi)))
        demand = util_of[pid] * config.hyperperiod / slot
        execution = max(1, _round_half_up(demand * (1 - mi)))
        memory = _round_half_up(demand * mi)
        partitions.append(
            Partition(id=pid, core=core_of[pid], mi=mi, util=util_of[pid], execution=execution, memory=memory)
        )
    return PartitionSet(partitions=tuple(partitions))


def split_budget_by_weights(q_total: int, weights: list[Fraction]) -> BudgetVector:
    """Integerize a weighted split of the total budget.

    Every core gets a floor of 1 transaction (a zero budget would degenerate
    its stall curve); the remainder is shared proportionally by largest
    fractional part, index breaking ties. All-zero weights fall back to an
    even split.
    """
    m = len(weights)
    if q_total < m:
        raise InvariantError(f"cannot split {q_total} transactions over {m} cores with floor 1")
    total_w = sum(weights)
    if total_w == 0:
        weights = [Fraction(1)] * m
        total_w = Fraction(m)
    available = q_total - m
    shares = [available * w / total_w for w in weights]
    base = [int(s) for s in shares]
    leftover = available - sum(base)
    order = sorted(range(m), key=lambda i: (-(shares[i] - base[i]), i))
    budgets = [1 + b for b in base]
    for i in order[:leftover]:
        budgets[i] += 1
    return BudgetVector(tuple(budgets))


def policy_se(config: ExperimentConfig) -> BudgetVector:
    """Even split: floor(Q/m) each, remainder to the lowest-index cores."""
    base, rem = divmod(config.q_total, config.m)
    return BudgetVector(tuple(base + (1 if i < rem else 0) for i in range(config.m)))


def _memory_weights(config: ExperimentConfig, unfinished: list[Partition]) -> list[Fraction]:
    weights = []
    for core in range(1, config.m + 1):
        mu_sum = sum(p.memory for p in unfinished if p.core == core)
        e_sum = sum(p.execution for p in unfinished if p.core == core)
        weights.append(Fraction(mu_sum, mu_sum + e_sum) if mu_sum + e_sum > 0 else Fraction(0))
    return weights


def policy_su(pset: PartitionSet, config: ExperimentConfig) -> BudgetVector:
    """Weighted split from the memory pressure of the whole set at t = 0."""
    return split_budget_by_weights(config.q_total, _memory_weights(config, list(pset.partitions)))


@dataclass
class DynamicPolicyOutcome:
    """What the DY co-analysis produced.

    ``schedule`` is the as-built memory schedule (final interval unbounded)
    when the set is schedulable, else None. ``completions`` maps partition id
    to its completion period for every partition that finished within H.
    """

    schedulable: bool
    schedule: MemorySchedule | None
    completions: dict[int, int]


def _reclaim_vector(config: ExperimentConfig, base: BudgetVector, unfinished: list[Partition]) -> BudgetVector:
    """Budget vector after reclaiming from cores with no unfinished work.

    Cores that still have unfinished partitions keep at least their base
    (initial) budget; finished cores fall to the 1-transaction floor. The
    freed budget is shared over the active cores in proportion to weights
    recomputed from the unfinished demands (largest remainder, index ties;
    even shares when every recomputed weight is zero).
    """
    live = sorted({p.core for p in unfinished})
    if len(live) == config.m or not live:
        return base
    budgets = [1] * config.m
    for core in live:
        budgets[core - 1] = base.budget_of(core)
    slack = config.q_total - sum(budgets)
    weights = _memory_weights(config, unfinished)
    total_w = sum(weights[core - 1] for core in live)
    if total_w == 0:
        shares = [Fraction(slack, len(live))] * len(live)
    else:
        shares = [slack * weights[core - 1] / total_w for core in live]
    floors = [int(s) for s in shares]
    leftover = slack - sum(floors)
    order = sorted(range(len(live)), key=lambda i: (-(shares[i] - floors[i]), live[i]))
    for i in order[:leftover]:
        floors[i] += 1
    for core, extra in zip(live, floors):
        budgets[core - 1] += extra
    return BudgetVector(tuple(budgets))


def policy_dy(pset: PartitionSet, config: ExperimentConfig) -> DynamicPolicyOutcome:
    """Event-driven co-analysis of the DY policy.

    The initial vector is SU's. At every completion event the vector is
    rebuilt by ``_reclaim_vector``: active cores keep their initial share and
    split the budget reclaimed from finished cores by weights recomputed from
    the unfinished partitions' remaining demands. Between events budgets are
    constant, so advancing event-to-event is exact. A running partition's
    completion is hypothesized by analyzing it over the intervals built since
    its start plus the current vector extended indefinitely; the earliest
    hypothesis is the next event, at which point that hypothesis matches the
    as-built schedule through the completion.
    """
    reg = config.regulation
    horizon = config.hyperperiod_periods
    queues = {core: list(pset.by_core(core)) for core in range(1, config.m + 1)}
    active: dict[int, tuple[Partition, int]] = {}
    for core, queue in queues.items():
        if queue:
            active[core] = (queue.pop(0), 0)

    unfinished = [p for p in pset.partitions]
    built: list[tuple[BudgetVector, int, int]] = []
    base = split_budget_by_weights(config.q_total, _memory_weights(config, unfinished))
    current_vec = base
    current_start = 0
    completions: dict[int, int] = {}

    while active:
        events: dict[int, int] = {}
        for core, (part, start) in active.items():
            span = _hypothesize_span(part, start, built, current_vec, current_start, core, reg, horizon, config)
            if span is not None:
                events[core] = start + span
        if not events:
            # Every running partition misses under the current vector and no
            # completion will ever change it.
            return DynamicPolicyOutcome(schedulable=False, schedule=None, completions=completions)

        t_next = min(events.values())
        assert current_start < t_next <= horizon, "events must advance within the hyperperiod"
        built.append((current_vec, current_start, t_next))
        for core in [c for c, t in events.items() if t == t_next]:
            part, _ = active.pop(core)
            completions[part.id] = t_next
            unfinished.remove(part)
            if queues[core]:
                if t_next >= horizon:
                    # Successor would start at (or past) the deadline.
                    return DynamicPolicyOutcome(schedulable=False, schedule=None, completions=completions)
                active[core] = (queues[core].pop(0), t_next)
        current_vec = _reclaim_vector(config, base, unfinished)
        current_start = t_next

    intervals = tuple(BudgetInterval(budgets=v, length=end - start) for v, start, end in built)
    intervals += (BudgetInterval(budgets=current_vec, length=None),)
    return DynamicPolicyOutcome(
        schedulable=True, schedule=MemorySchedule(intervals=intervals), completions=completions
    )


def _hypothesize_span(
    part: Partition,
    start: int,
    built: list[tuple[BudgetVector, int, int]],
    current_vec: BudgetVector,
    current_start: int,
    core: int,
    reg: RegulationConfig,
    horizon: int,
    config: ExperimentConfig,
) -> int | None:
    """Span of ``part`` from its start period under the schedule so far, or
    None if it cannot converge within its slice of the hyperperiod."""
    intervals = []
    for vec, seg_start, seg_end in built:
        if seg_start >= start:
            intervals.append(BudgetInterval(budgets=vec, length=seg_end - seg_start))
    assert not intervals or built[-1][2] == current_start
    intervals.append(BudgetInterval(budgets=current_vec, length=None))
    view = MemorySchedule(intervals=tuple(intervals))
    deadline = (horizon - start) * config.period
    result = analyze_dynamic(part.workload(deadline), view, core, reg)
    return result.span if result.status is AnalysisStatus.CONVERGED else None


def evaluate_schedulability(pset: PartitionSet, policy: str, config: ExperimentConfig) -> bool:
    """True iff every core's last partition completes by H under ``policy``."""
    policy = policy.upper()
    if policy == "DY":
        return policy_dy(pset, config).schedulable
    if policy == "SE":
        vector = policy_se(config)
    elif policy == "SU":
        vector = policy_su(pset, config)
    else:
        raise InvariantError(f"unknown policy {policy!r}; expected one of {POLICIES}")

    reg = config.regulation
    horizon = config.hyperperiod_periods
    schedule = MemorySchedule.static(vector)
    for core in range(1, config.m + 1):
        start = 0
        for part in pset.by_core(core):
            if start >= horizon:
                return False
            deadline = (horizon - start) * config.period
            result = analyze_dynamic(part.workload(deadline), schedule, core, reg)
            if result.status is not AnalysisStatus.CONVERGED:
                return False
            start += result.span
    return True


@dataclass(frozen=True)
class SweepPoint:
    m: int
    mir: Fraction
    sets: int


@dataclass(frozen=True)
class SweepConfig:
    points: tuple[SweepPoint, ...]
    u_values: tuple[Fraction, ...]
    seed: int
    policies: tuple[str, ...] = POLICIES


@dataclass(frozen=True)
class ExperimentRow:
    policy: str
    m: int
    mir: Fraction
    u: Fraction
    schedulable: int
    total: int

    @property
    def ratio(self) -> float:
        return self.schedulable / self.total


def _derive_seed(master: int, m: int, mir: Fraction, u: Fraction, index: int) -> int:
    key = f"{master}:{m}:{mir}:{u}:{index}".encode()
    return int.from_bytes(blake2b(key, digest_size=8).digest(), "big")


def _run_cell(args: tuple) -> dict[str, int]:
    m, mir, sets, u, seed, policies = args
    config = ExperimentConfig(m=m, mir=mir, u=u)
    counts = {p: 0 for p in policies}
    for index in range(sets):
        rng = random.Random(_derive_seed(seed, m, mir, u, index))
        pset = generate_partition_set(config, rng)
        for p in policies:
            if evaluate_schedulability(pset, p, config):
                counts[p] += 1
    return counts


def _worker_count() -> int:
    env = os.environ.get("MEMBW_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvariantError(f"MEMBW_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def run_sweep(sweep: SweepConfig) -> list[ExperimentRow]:
    """Evaluate every (point, U) cell; deterministic given the seed.

    Cells are independent: per-set generators are seeded from
    (seed, m, MIr, U, set index), so results do not depend on execution
    order or worker count (MEMBW_THREADS caps the process pool).
    """
    cells = [(p.m, p.mir, p.sets, u, sweep.seed, sweep.policies) for p in sweep.points for u in sweep.u_values]
    workers = min(_worker_count(), len(cells))
    if workers <= 1:
        cell_counts = [_run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cell_counts = list(pool.map(_run_cell, cells, chunksize=1))

    rows = []
    index = 0
    for point in sweep.points:
        for u in sweep.u_values:
            counts = cell_counts[index]
            index += 1
            for policy in sweep.policies:
                rows.append(
                    ExperimentRow(
                        policy=policy, m=point.m, mir=point.mir, u=u,
                        schedulable=counts[policy], total=point.sets,
                    )
                )
    return rows


def rows_to_csv(rows: list[ExperimentRow], seed: int) -> str:
    """CSV with a reproducibility header; floats only appear here."""
    lines = [
        f"# seed={seed}",
        "# rng=blake2b(seed:m:MIr:U:index) -> random.Random per set",
        "policy,m,MIr,U,schedulable,total,ratio,seed",
    ]
    for r in rows:
        lines.append(
            f"{r.policy},{r.m},{float(r.mir)},{float(r.u)},{r.schedulable},{r.total},{r.ratio},{seed}"
        )
    return "\n".join(lines) + "\n"


def preset_sweep(name: str, seed: int) -> SweepConfig:
    """The canned sweeps: 'vary-m', 'vary-mir', and 'smoke'."""
    full_u = tuple(Fraction(10 + k, 100) for k in range(81))
    if name == "vary-m":
        points = (
            SweepPoint(m=4, mir=Fraction(1, 4), sets=1000),
            SweepPoint(m=8, mir=Fraction(1, 4), sets=100),
            SweepPoint(m=12, mir=Fraction(1, 4), sets=100),
        )
        return SweepConfig(points=points, u_values=full_u, seed=seed)
    if name == "vary-mir":
        points = tuple(SweepPoint(m=8, mir=Fraction(15 + 5 * k, 100), sets=100) for k in range(8))
        return SweepConfig(points=points, u_values=full_u, seed=seed)
    if name == "smoke":
        points = (SweepPoint(m=4, mir=Fraction(1, 4), sets=10),)
        return SweepConfig(points=points, u_values=(Fraction(1, 10), Fraction(1, 2), Fraction(9, 10)), seed=seed)
    raise InvariantError(f"unknown preset {name!r}; expected vary-m, vary-mir or smoke")
