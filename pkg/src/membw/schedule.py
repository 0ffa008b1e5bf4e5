"""Workloads, regulation parameters, and memory schedules.

A workload abstracts one deadline-constrained activity on a core: E slots of
pure execution plus mu memory transactions, to finish within D. Time is
discretized into regulation periods of P seconds, each serving at most Q
transactions of worst-case latency L_max (so one transaction occupies one
"slot" and Q slots make a period). A memory schedule is the time-ordered
sequence of budget vectors in force, each for a fixed number of periods; a
static assignment is simply a schedule with one unbounded interval.

Scenario files (JSON) bundle a regulation config, a schedule, and workloads;
:func:`load_scenario` parses them with exact rational numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvariantError, ScenarioError, ScheduleExhaustedError
from .stall_curve import BudgetVector

Rational = int | Fraction


@dataclass(frozen=True)
class RegulationConfig:
    """Memory regulation parameters.

    ``q_total`` overrides the derived transactions-per-period count
    floor(period / l_max) for setups whose published L_max and Q disagree;
    when set, the effective slot length is period / q_total so that span,
    deadline, and period arithmetic stay mutually consistent. ``l_min`` and
    ``l_size`` are recorded for completeness but unused: the analysis always
    charges the worst-case latency.
    """

    period: Fraction
    l_max: Fraction
    l_min: Fraction | None = None
    l_size: int | None = None
    q_total: int | None = None

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise InvariantError("regulation config: period must be > 0")
        if self.l_max <= 0:
            raise InvariantError("regulation config: l_max must be > 0")
        if self.q_total is not None and self.q_total < 1:
            raise InvariantError("regulation config: q_total override must be >= 1")
        if self.transactions_per_period < 1:
            raise InvariantError("regulation config: period must cover at least one transaction")

    @property
    def transactions_per_period(self) -> int:
        """Total transactions servable per period (the scalar Q)."""
        if self.q_total is not None:
            return self.q_total
        return int(self.period / self.l_max)

    @property
    def slot(self) -> Fraction:
        """Effective worst-case latency of one transaction, in seconds."""
        if self.q_total is not None:
            return self.period / self.q_total
        return self.l_max


@dataclass(frozen=True)
class Workload:
    """One deadline-constrained demand: E execution slots, mu transactions.

    ``deadline`` is relative to the workload's release (a period boundary) in
    seconds; None means the analysis runs to convergence without a deadline
    check. beta = E + mu is the span lower bound in slots: even with zero
    stall the workload occupies that many.
    """

    execution: int
    memory: int
    deadline: Fraction | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.execution, int) or self.execution < 1:
            raise InvariantError("workload: execution demand E must be an integer >= 1")
        if not isinstance(self.memory, int) or self.memory < 0:
            raise InvariantError("workload: memory demand mu must be an integer >= 0")
        if self.deadline is not None and self.deadline <= 0:
            raise InvariantError("workload: deadline must be > 0 when given")

    @property
    def beta(self) -> int:
        return self.execution + self.memory


@dataclass(frozen=True)
class BudgetInterval:
    """A budget vector in force for ``length`` periods (None = unbounded)."""

    budgets: BudgetVector
    length: int | None

    def __post_init__(self) -> None:
        if self.length is not None and (not isinstance(self.length, int) or self.length < 1):
            raise InvariantError("budget interval: length must be an integer >= 1 or unbounded")


@dataclass(frozen=True)
class MemorySchedule:
    """Ordered budget intervals, all over the same cores and total budget."""

    intervals: tuple[BudgetInterval, ...]

    def __post_init__(self) -> None:
        if not self.intervals:
            raise InvariantError("memory schedule: at least one interval required")
        first = self.intervals[0].budgets
        for iv in self.intervals[1:]:
            if iv.budgets.m != first.m:
                raise InvariantError("memory schedule: all intervals must cover the same cores")
            if iv.budgets.total != first.total:
                raise InvariantError("memory schedule: all budget vectors must sum to the same total")
        for iv in self.intervals[:-1]:
            if iv.length is None:
                raise InvariantError("memory schedule: only the final interval may be unbounded")

    @classmethod
    def static(cls, budgets: BudgetVector) -> "MemorySchedule":
        """A static assignment: one unbounded interval."""
        return cls(intervals=(BudgetInterval(budgets=budgets, length=None),))

    @property
    def m(self) -> int:
        return self.intervals[0].budgets.m

    @property
    def q_total(self) -> int:
        return self.intervals[0].budgets.total

    @property
    def is_bounded(self) -> bool:
        return self.intervals[-1].length is not None

    @property
    def total_length(self) -> int | None:
        """Total periods covered, or None when the last interval is unbounded."""
        if not self.is_bounded:
            return None
        return sum(iv.length for iv in self.intervals)  # type: ignore[misc]


def split_span(schedule: MemorySchedule, span: int) -> tuple[int, ...]:
    """Prefix-greedy split of a span over the schedule's intervals.

    Interval j receives W^j = max(0, min(L^j, span - periods already placed)).
    Raises :class:`ScheduleExhaustedError` when a fully bounded schedule is
    shorter than ``span``.
    """
    if span < 0:
        raise InvariantError("split_span: span must be >= 0")
    parts = []
    remaining = span
    for iv in schedule.intervals:
        part = remaining if iv.length is None else min(iv.length, remaining)
        parts.append(part)
        remaining -= part
    if remaining > 0:
        raise ScheduleExhaustedError(shortfall=remaining)
    return tuple(parts)


def deadline_periods(workload: Workload, config: RegulationConfig) -> int:
    """Greatest span (in periods) whose duration still meets the deadline."""
    if workload.deadline is None:
        raise InvariantError("deadline_periods: workload has no deadline")
    period_duration = config.transactions_per_period * config.slot
    return int(workload.deadline / period_duration)


@dataclass(frozen=True)
class ScenarioWorkload:
    core: int
    workload: Workload


@dataclass(frozen=True)
class Scenario:
    config: RegulationConfig
    schedule: MemorySchedule
    workloads: tuple[ScenarioWorkload, ...]

    def workload_for_core(self, core: int) -> Workload:
        matches = [w.workload for w in self.workloads if w.core == core]
        if not matches:
            raise ScenarioError(f"scenario: no workload for core {core}")
        if len(matches) > 1:
            raise ScenarioError(f"scenario: multiple workloads for core {core}; pick one per core")
        return matches[0]


def _as_fraction(value, what: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise ScenarioError(f"scenario: {what} must be a number, got {value!r}")
    return Fraction(value)


def _as_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"scenario: {what} must be an integer, got {value!r}")
    return value


def parse_scenario(text: str) -> Scenario:
    """Parse a JSON scenario, reading all numeric literals exactly.

    Expected shape::

        {
          "config":    {"P": seconds, "L_max": seconds, "Q": optional int,
                        "L_min": optional seconds, "L_size": optional int},
          "schedule":  [{"budgets": [q_1..q_m], "length": periods | "unbounded"}, ...],
          "workloads": [{"core": i, "E": slots, "mu": transactions,
                         "D": optional seconds}, ...]
        }
    """
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario: malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario: top level must be an object")
    for key in ("config", "schedule", "workloads"):
        if key not in doc:
            raise ScenarioError(f"scenario: missing required key {key!r}")

    cfg = doc["config"]
    if not isinstance(cfg, dict) or "P" not in cfg or "L_max" not in cfg:
        raise ScenarioError("scenario: config must be an object with P and L_max")
    try:
        config = RegulationConfig(
            period=_as_fraction(cfg["P"], "config.P"),
            l_max=_as_fraction(cfg["L_max"], "config.L_max"),
            l_min=_as_fraction(cfg["L_min"], "config.L_min") if "L_min" in cfg else None,
            l_size=_as_int(cfg["L_size"], "config.L_size") if "L_size" in cfg else None,
            q_total=_as_int(cfg["Q"], "config.Q") if "Q" in cfg else None,
        )

        if not isinstance(doc["schedule"], list) or not doc["schedule"]:
            raise ScenarioError("scenario: schedule must be a non-empty array")
        intervals = []
        for pos, entry in enumerate(doc["schedule"]):
            if not isinstance(entry, dict) or "budgets" not in entry or "length" not in entry:
                raise ScenarioError(f"scenario: schedule[{pos}] must have budgets and length")
            raw_budgets = entry["budgets"]
            if not isinstance(raw_budgets, list):
                raise ScenarioError(f"scenario: schedule[{pos}].budgets must be an array")
            budgets = BudgetVector(tuple(_as_int(b, f"schedule[{pos}].budgets[{i}]") for i, b in enumerate(raw_budgets)))
            length = entry["length"]
            if length == "unbounded":
                intervals.append(BudgetInterval(budgets=budgets, length=None))
            else:
                intervals.append(BudgetInterval(budgets=budgets, length=_as_int(length, f"schedule[{pos}].length")))
        schedule = MemorySchedule(intervals=tuple(intervals))

        if not isinstance(doc["workloads"], list) or not doc["workloads"]:
            raise ScenarioError("scenario: workloads must be a non-empty array")
        workloads = []
        for pos, entry in enumerate(doc["workloads"]):
            if not isinstance(entry, dict) or not {"core", "E", "mu"} <= set(entry):
                raise ScenarioError(f"scenario: workloads[{pos}] must have core, E and mu")
            core = _as_int(entry["core"], f"workloads[{pos}].core")
            if not 1 <= core <= schedule.m:
                raise ScenarioError(f"scenario: workloads[{pos}].core {core} outside [1..{schedule.m}]")
            if any(w.core == core for w in workloads):
                raise ScenarioError(f"scenario: workloads[{pos}]: duplicate core {core}")
            workloads.append(
                ScenarioWorkload(
                    core=core,
                    workload=Workload(
                        execution=_as_int(entry["E"], f"workloads[{pos}].E"),
                        memory=_as_int(entry["mu"], f"workloads[{pos}].mu"),
                        deadline=_as_fraction(entry["D"], f"workloads[{pos}].D") if "D" in entry else None,
                    ),
                )
            )
    except InvariantError as exc:
        # Re-badge so the CLI reports a scenario problem, keeping the
        # invariant-naming message.
        raise ScenarioError(f"scenario: {exc}") from None

    if config.q_total is not None and config.q_total != schedule.q_total:
        raise ScenarioError(
            f"scenario: config.Q = {config.q_total} but schedule budgets sum to {schedule.q_total}"
        )
    return Scenario(config=config, schedule=schedule, workloads=tuple(workloads))


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())
