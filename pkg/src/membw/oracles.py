"""Brute-force references the analyzers are tested against.

Nothing here is performance-tuned; these exist as ground truth for small
instances. Deliberate asymmetry: the oracles charge the raw per-period stall
values I(k), while the analyzers work with the concave envelope. The
analyzers' results must dominate (bound) the oracles' exact optima; tests
exercise precisely that relationship.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InvariantError, OracleTooLargeError
from .schedule import MemorySchedule, Workload
from .stall_curve import RawStallPoints, build_raw_points, concave_envelope

ENUMERATION_GUARD = 10**7


def oracle_max_stall(memory: int, span: int, raw: RawStallPoints) -> int:
    """Exact worst cumulative stall of ``memory`` transactions over ``span``
    periods: max of sum I(k_t) over all per-period counts k_t summing to
    ``memory`` with each k_t <= q. Dynamic program over (periods, memory)."""
    if span < 0 or memory < 0:
        raise InvariantError("oracle_max_stall: span and memory must be >= 0")
    if memory > span * raw.q:
        raise InvariantError(f"oracle_max_stall: {memory} transactions cannot fit in {span} period(s) of budget {raw.q}")
    values = raw.values
    q = raw.q
    prev = [-1] * (memory + 1)
    prev[0] = 0
    for _ in range(span):
        cur = [-1] * (memory + 1)
        for used in range(memory + 1):
            best = -1
            for k in range(min(q, used) + 1):
                below = prev[used - k]
                if below >= 0 and below + values[k] > best:
                    best = below + values[k]
            cur[used] = best
        prev = cur
    assert prev[memory] >= 0
    return prev[memory]


def oracle_distribute(
    splits: tuple[int, ...], memory: int, raws: tuple[RawStallPoints, ...]
) -> tuple[Fraction, tuple[int, ...]]:
    """Exhaustive optimum of the per-interval distribution objective.

    Maximizes sum_j envelope_j(mu^j / W^j) * W^j over integer assignments
    with mu^j <= W^j * q^j and sum mu^j <= memory. Returns (objective,
    assignment); the first maximizer in lexicographic enumeration order wins,
    matching the greedy's lowest-index tie-breaking.
    """
    if len(splits) != len(raws):
        raise InvariantError(f"oracle_distribute: {len(splits)} splits but {len(raws)} curves")
    curves = [concave_envelope(raw) for raw in raws]
    caps = [w * raw.q for w, raw in zip(splits, raws)]
    space = 1
    for cap in caps:
        space *= cap + 1
        if space > ENUMERATION_GUARD:
            raise OracleTooLargeError(f"oracle_distribute: assignment space exceeds {ENUMERATION_GUARD}")

    tables = []
    for j, cap in enumerate(caps):
        limit = min(cap, memory)
        tables.append([curves[j].stall_over(splits[j], x) for x in range(limit + 1)])

    n = len(splits)
    best_value = Fraction(-1)
    best_assign: tuple[int, ...] = ()
    assign = [0] * n

    def rec(j: int, left: int, value: Fraction) -> None:
        nonlocal best_value, best_assign
        if j == n:
            if value > best_value:
                best_value = value
                best_assign = tuple(assign)
            return
        table = tables[j]
        for x in range(min(len(table) - 1, left) + 1):
            assign[j] = x
            rec(j + 1, left - x, value + table[x])
        assign[j] = 0

    rec(0, memory, Fraction(0))
    return best_value, best_assign


def worst_case_span_by_simulation(
    workload: Workload, schedule: MemorySchedule, core: int, horizon: int
) -> int:
    """Largest completion period over every feasible per-period access pattern.

    A pattern fixes how many transactions the workload issues in each period;
    each period then charges the raw worst-case stall for that count, and the
    remaining slots execute. Patterns that would leave idle slots while
    memory demand and budget remain are impossible (the workload is
    work-conserving) and are skipped. Returns horizon + 1 when some pattern
    fails to complete within ``horizon`` periods.
    """
    if horizon < 1:
        raise InvariantError("simulation horizon must be >= 1")
    per_period: list[tuple[int, tuple[int, ...]]] = []
    for interval in schedule.intervals:
        count = interval.length if interval.length is not None else horizon - len(per_period)
        raw = build_raw_points(interval.budgets, core)
        per_period.extend([(raw.q, raw.values)] * max(0, count))
        if len(per_period) >= horizon:
            break
    per_period = per_period[:horizon]
    q_total = schedule.q_total

    worst = 0

    def rec(t: int, execution: int, memory: int) -> None:
        nonlocal worst
        if execution == 0 and memory == 0:
            if t > worst:
                worst = t
            return
        if t == len(per_period):
            worst = max(worst, horizon + 1)
            return
        q, stall_values = per_period[t]
        for issued in range(min(q, memory) + 1):
            slots = q_total - issued - stall_values[issued]
            assert slots >= 0
            executed = min(execution, slots)
            if slots > executed and memory > issued:
                continue
            rec(t + 1, execution - executed, memory - issued)

    rec(0, workload.execution, workload.memory)
    return worst
