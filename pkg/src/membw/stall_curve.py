"""Per-core memory stall curves under budget regulation.

Each core i of an m-core system gets a budget q_i of memory transactions per
regulation period, with sum(q_i) = Q, the total number of transactions the
memory system can serve in one period. A core issuing k transactions in a
period can be stalled by the other cores' regulated traffic (round-robin
arbitration) and, at k = q_i, by depletion of its own budget. The worst-case
per-period stall, in transaction slots, is

    I(k) = sum over other cores j of min(k, q_j)    for k < q_i,
    I(q_i) = Q - q_i                                (blocked to period end).

The analyzers need a concave majorant of these q_i + 1 points, because a
concave curve lets the worst case over a whole span be bounded by evaluating
at the mean per-period rate. :func:`concave_envelope` builds the upper convex
hull of the raw points; :class:`StallCurve` stores it as a segment table and
evaluates it with exact rational arithmetic.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import InvariantError

Rational = int | Fraction


@dataclass(frozen=True)
class BudgetVector:
    """Per-core memory budgets (transactions per regulation period).

    Core indices are 1-based throughout the package. The scalar total is the
    per-period transaction capacity Q of the memory system; the model assumes
    the budgets exhaust it. Single-entry vectors are accepted so degenerate
    no-interference curves can be built in tests.
    """

    budgets: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.budgets) < 1:
            raise InvariantError("budget vector: at least one core required")
        for i, q in enumerate(self.budgets, start=1):
            if not isinstance(q, int) or q < 1:
                raise InvariantError(f"budget vector: every budget must be an integer >= 1, got q_{i} = {q!r}")

    @property
    def m(self) -> int:
        return len(self.budgets)

    @property
    def total(self) -> int:
        """Total transactions per period (the scalar Q)."""
        return sum(self.budgets)

    def budget_of(self, core: int) -> int:
        self._check_core(core)
        return self.budgets[core - 1]

    def others(self, core: int) -> tuple[int, ...]:
        """Budgets of every core except ``core``."""
        self._check_core(core)
        return self.budgets[: core - 1] + self.budgets[core:]

    def _check_core(self, core: int) -> None:
        if not 1 <= core <= self.m:
            raise InvariantError(f"core index {core} outside [1..{self.m}]")


@dataclass(frozen=True)
class RawStallPoints:
    """The raw worst-case stall values I(0..q) for one core, in slots."""

    core: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) < 2:
            raise InvariantError("raw stall points: need q + 1 >= 2 points")
        if self.values[0] != 0:
            raise InvariantError("raw stall points: I(0) must be 0")
        for k in range(1, len(self.values)):
            if self.values[k] < self.values[k - 1]:
                raise InvariantError(f"raw stall points: values must be non-decreasing, I({k}) < I({k - 1})")

    @property
    def q(self) -> int:
        return len(self.values) - 1


def build_raw_points(budgets: BudgetVector, core: int) -> RawStallPoints:
    """Evaluate the raw stall values I(0..q) for ``core`` under ``budgets``."""
    q = budgets.budget_of(core)
    others = budgets.others(core)
    values = [sum(min(k, qj) for qj in others) for k in range(q)]
    values.append(budgets.total - q)
    return RawStallPoints(core=core, values=tuple(values))


@dataclass(frozen=True)
class Segment:
    """One linear piece of a stall curve: value(r) = value + slope * (r - start)."""

    start: int
    value: int
    slope: Fraction
    width: int


@dataclass(frozen=True)
class StallCurve:
    """Concave piecewise-linear upper bound on per-period stall vs. memory rate.

    The domain is [0, q]; ``segments`` tile it, slopes strictly decreasing.
    Segment start points are the curve's "start points": the only places a
    maximizing assignment ever needs to land between, which is what the
    greedy distributor exploits via :meth:`next_start` and :meth:`slope_at`.
    """

    core: int
    q: int
    segments: tuple[Segment, ...]
    _starts: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        segs = self.segments
        if not segs:
            raise InvariantError("stall curve: at least one segment required")
        if segs[0].start != 0 or segs[0].value != 0:
            raise InvariantError("stall curve: must start at (0, 0)")
        pos = 0
        for i, s in enumerate(segs):
            if s.start != pos:
                raise InvariantError("stall curve: segments must tile the domain without gaps")
            if s.width < 1:
                raise InvariantError("stall curve: segment widths must be >= 1")
            if i > 0 and s.slope >= segs[i - 1].slope:
                raise InvariantError("stall curve: slopes must be strictly decreasing (concavity)")
            if i > 0:
                prev = segs[i - 1]
                if prev.value + prev.slope * prev.width != s.value:
                    raise InvariantError("stall curve: segment values must be continuous")
            pos += s.width
        if pos != self.q:
            raise InvariantError(f"stall curve: segments cover [0, {pos}] but domain is [0, {self.q}]")
        object.__setattr__(self, "_starts", tuple(s.start for s in segs))

    @property
    def start_points(self) -> tuple[int, ...]:
        return self._starts

    def _check_domain(self, r: Rational) -> None:
        if r < 0 or r > self.q:
            raise InvariantError(f"rate {r} outside curve domain [0, {self.q}]")

    def value_at(self, r: Rational) -> Fraction:
        """Evaluate the envelope at rate ``r`` (transactions per period), exactly."""
        self._check_domain(r)
        seg = self.segments[bisect_right(self._starts, r) - 1]
        return Fraction(seg.value) + seg.slope * (r - seg.start)

    __call__ = value_at

    def slope_at(self, r: Rational) -> Fraction:
        """Slope of the segment containing ``r``; at a start point, the segment
        beginning there. Defined as 0 at r = q so callers never need a guard."""
        self._check_domain(r)
        if r == self.q:
            return Fraction(0)
        return self.segments[bisect_right(self._starts, r) - 1].slope

    def next_start(self, r: Rational) -> int | None:
        """Least segment boundary strictly above ``r`` (the domain end q counts
        as the final boundary). Returns None when ``r`` is already at q, i.e.
        the rate is saturated and cannot advance."""
        self._check_domain(r)
        if r >= self.q:
            return None
        idx = bisect_right(self._starts, r)
        return self._starts[idx] if idx < len(self._starts) else self.q

    def stall_over(self, span: int, memory: int) -> Fraction:
        """Exact span-cumulative stall: value_at(memory / span) * span.

        Single rational construction; the hot path of both analyzers. The
        caller guarantees 0 <= memory <= span * q.
        """
        if span == 0:
            return Fraction(0)
        if memory < 0 or memory > span * self.q:
            raise InvariantError(f"memory {memory} outside feasible range [0, {span * self.q}] for span {span}")
        seg = self.segments[self._segment_index(memory, span)]
        return seg.value * span + seg.slope * (memory - seg.start * span)

    def _segment_index(self, memory: int, span: int) -> int:
        # Locate the segment whose scaled domain [start*span, end*span] holds
        # ``memory``, comparing integers only. Segment tables are tiny (at
        # most m distinct breakpoints), so a linear scan beats bisect here.
        idx = 0
        for i in range(1, len(self._starts)):
            if self._starts[i] * span <= memory:
                idx = i
            else:
                break
        return idx

    def to_json_dict(self) -> dict:
        return {
            "core": self.core,
            "q": self.q,
            "start_points": list(self._starts),
            "segments": [
                {"start": s.start, "value": s.value, "slope": str(s.slope), "width": s.width}
                for s in self.segments
            ],
        }


def _upper_hull(points: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Upper convex hull of points with strictly increasing x (monotone chain).

    Collinear interior points are dropped, so consecutive hull slopes are
    strictly decreasing.
    """
    hull: list[tuple[int, int]] = []
    for p in points:
        while len(hull) >= 2:
            ox, oy = hull[-2]
            ax, ay = hull[-1]
            # cross((a - o), (p - o)) >= 0 means the middle point a is on or
            # below the chord o->p, so it is not an upper-hull vertex.
            if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _curve_from_vertices(core: int, q: int, vertices: list[tuple[int, int]]) -> StallCurve:
    segments = []
    for (x0, y0), (x1, y1) in zip(vertices, vertices[1:]):
        segments.append(Segment(start=x0, value=y0, slope=Fraction(y1 - y0, x1 - x0), width=x1 - x0))
    return StallCurve(core=core, q=q, segments=tuple(segments))


def concave_envelope(raw: RawStallPoints) -> StallCurve:
    """Tightest concave piecewise-linear majorant of the raw stall points."""
    points = list(enumerate(raw.values))
    return _curve_from_vertices(raw.core, raw.q, _upper_hull(points))


def curve_for_core(budgets: BudgetVector, core: int) -> StallCurve:
    """Stall curve for ``core`` without materializing all q + 1 raw points.

    On [0, q-1] the raw function is a sum of min(k, q_j) terms, hence already
    concave with breakpoints only at other cores' budget values; the single
    appended point (q, Q - q) is the only possible convexity. Hulling the
    breakpoint vertices therefore equals hulling every integer point, in
    O(m log m) instead of O(q). Matters because real configurations have
    budgets in the tens of thousands.
    """
    return _cached_curve(budgets, core)


@lru_cache(maxsize=16384)
def _cached_curve(budgets: BudgetVector, core: int) -> StallCurve:
    q = budgets.budget_of(core)
    others = budgets.others(core)
    xs = {0, q - 1, q}
    xs.update(qj for qj in others if qj < q)
    vertices = []
    for x in sorted(xs):
        y = budgets.total - q if x == q else sum(min(x, qj) for qj in others)
        vertices.append((x, y))
    return _curve_from_vertices(core, q, _upper_hull(vertices))
