"""Worst-case span across a memory schedule with per-interval budget vectors.

A span of W periods is first split over the schedule's intervals
(prefix-greedy, :func:`membw.schedule.split_span`); the worst case then needs
the memory demand mu distributed over the intervals so that the summed stall

    S = sum_j I^j(mu^j / W^j) * W^j

is maximized subject to mu^j <= W^j * q^j and sum mu^j <= mu. Because every
per-interval curve is concave, a marginal-slope greedy is exact: always feed
the interval whose curve is steepest at its current rate, jumping rates from
segment start point to segment start point. The span iteration then mirrors
the static one with S in place of the single-curve stall term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvariantError, ScheduleExhaustedError
from .results import AnalysisResult, AnalysisStatus, IntervalBreakdown, TraceEntry
from .schedule import MemorySchedule, RegulationConfig, Workload, deadline_periods, split_span
from .stall_curve import StallCurve, curve_for_core


@dataclass(frozen=True)
class MemoryAssignment:
    """Per-interval transaction counts chosen by the distributor.

    ``saturated`` marks the degenerate outcome where every interval hit its
    capacity W^j * q^j before all of mu was placed; the span iteration reacts
    by growing W, so a converged analysis never ends saturated.
    """

    per_interval: tuple[int, ...]
    saturated: bool

    @property
    def total(self) -> int:
        return sum(self.per_interval)


@dataclass(frozen=True)
class StallBreakdown:
    """Per-interval stalls S^j and their sum."""

    per_interval: tuple[Fraction, ...]
    total: Fraction


def distribute_memory(splits: tuple[int, ...], memory: int, curves: tuple[StallCurve, ...]) -> MemoryAssignment:
    """Stall-maximizing integral split of ``memory`` over the intervals.

    Greedy on marginal stall slopes; ties go to the lowest interval index so
    results are reproducible. Runs in O(intervals * segments) steps, with all
    rate comparisons done on integers (rates mu^j / W^j are never built).
    """
    n = len(splits)
    if len(curves) != n:
        raise InvariantError(f"distribute_memory: {n} splits but {len(curves)} curves")
    if memory < 0:
        raise InvariantError("distribute_memory: memory must be >= 0")
    for w in splits:
        if w < 0:
            raise InvariantError("distribute_memory: splits must be >= 0")

    assign = [0] * n
    if memory == 0:
        return MemoryAssignment(per_interval=tuple(assign), saturated=False)

    caps = [w * c.q for w, c in zip(splits, curves)]
    total = 0
    max_steps = sum(len(c.segments) + 1 for c in curves) + 1
    for _ in range(max_steps):
        best = -1
        best_num = 0
        best_den = 1
        best_seg = 0
        for j in range(n):
            if assign[j] >= caps[j]:
                continue
            curve = curves[j]
            seg_idx = curve._segment_index(assign[j], splits[j])
            slope = curve.segments[seg_idx].slope
            if best < 0 or slope.numerator * best_den > best_num * slope.denominator:
                best, best_num, best_den, best_seg = j, slope.numerator, slope.denominator, seg_idx
        if best < 0:
            return MemoryAssignment(per_interval=tuple(assign), saturated=True)
        curve = curves[best]
        starts = curve.start_points
        boundary = starts[best_seg + 1] if best_seg + 1 < len(starts) else curve.q
        headroom = memory - (total - assign[best])
        new_value = min(headroom, boundary * splits[best])
        total += new_value - assign[best]
        assign[best] = new_value
        if total == memory:
            return MemoryAssignment(per_interval=tuple(assign), saturated=False)
    raise AssertionError("greedy distribution exceeded its step bound")


def stall_breakdown(
    splits: tuple[int, ...], assignment: MemoryAssignment, curves: tuple[StallCurve, ...]
) -> StallBreakdown:
    """Evaluate S^j = I^j(mu^j / W^j) * W^j per interval, exactly."""
    stalls = tuple(
        curves[j].stall_over(splits[j], assignment.per_interval[j]) if splits[j] > 0 else Fraction(0)
        for j in range(len(splits))
    )
    return StallBreakdown(per_interval=stalls, total=sum(stalls, Fraction(0)))


def analyze_dynamic(
    workload: Workload,
    schedule: MemorySchedule,
    core: int,
    config: RegulationConfig,
    curves: tuple[StallCurve, ...] | None = None,
) -> AnalysisResult:
    """Fixed-point span analysis of one workload across a memory schedule.

    Converges to an upper bound on the span, or reports a deadline miss (an
    iterate no longer fits the deadline) or schedule exhaustion (an iterate
    outgrew a fully bounded schedule; the result carries the shortfall).
    ``curves`` may be passed to reuse prebuilt per-interval stall curves.
    """
    if schedule.q_total != config.transactions_per_period:
        raise InvariantError(
            f"schedule budgets sum to {schedule.q_total} but config provides "
            f"{config.transactions_per_period} transactions per period"
        )
    if curves is None:
        curves = tuple(curve_for_core(iv.budgets, core) for iv in schedule.intervals)
    q_total = schedule.q_total
    beta = workload.beta
    memory = workload.memory
    limit = deadline_periods(workload, config) if workload.deadline is not None else None

    span = -(-beta // q_total)
    trace = [TraceEntry(k=0, span=span, stall=Fraction(0))]
    if limit is not None and span > limit:
        return AnalysisResult(
            status=AnalysisStatus.DEADLINE_MISS, span=span, length_slots=None, trace=tuple(trace)
        )

    cap = (limit if limit is not None else beta) + 2
    k = 0
    while True:
        k += 1
        if k > cap:
            raise AssertionError("dynamic iteration exceeded its defensive cap")
        try:
            splits = split_span(schedule, span)
        except ScheduleExhaustedError as exc:
            return AnalysisResult(
                status=AnalysisStatus.SCHEDULE_EXHAUSTED,
                span=span,
                length_slots=None,
                trace=tuple(trace),
                shortfall=exc.shortfall,
            )
        assignment = distribute_memory(splits, memory, curves)
        stalls = stall_breakdown(splits, assignment, curves)
        nxt = math.ceil((beta + stalls.total) / q_total)
        assert nxt >= span, "span iterates must be non-decreasing"
        trace.append(TraceEntry(k=k, span=nxt, stall=stalls.total))
        if limit is not None and nxt > limit:
            return AnalysisResult(
                status=AnalysisStatus.DEADLINE_MISS, span=nxt, length_slots=None, trace=tuple(trace)
            )
        if nxt == span:
            assert not assignment.saturated, "fixed point must place all memory (saturation contradicts it)"
            breakdown = tuple(
                IntervalBreakdown(interval=j + 1, span=splits[j], memory=assignment.per_interval[j], stall=stalls.per_interval[j])
                for j in range(len(splits))
            )
            return AnalysisResult(
                status=AnalysisStatus.CONVERGED,
                span=nxt,
                length_slots=nxt * q_total,
                trace=tuple(trace),
                breakdown=breakdown,
            )
        span = nxt
