"""Open-loop LTE-U ON/OFF schedule for one cycle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import ContractError, InfeasibleScheduleError
from .timebase import MS, BusyLabel, BusyPeriod, CycleWindow, Interval, TimeNs


@dataclass(frozen=True)
class LteuPattern:
    period_T: int
    ON_max: int = 20 * MS
    ON_min: int = 6 * MS
    gap: int = 2 * MS

    def __post_init__(self):
        if not 0 < self.ON_min <= self.ON_max < self.period_T:
            raise ContractError(
                f"need 0 < ON_min <= ON_max < period_T, got "
                f"{self.ON_min}, {self.ON_max}, {self.period_T}"
            )
        if self.gap <= 0:
            raise ContractError(f"gap must be positive, got {self.gap}")


@dataclass(frozen=True)
class OnSchedule:
    cycle: CycleWindow
    on_intervals: Tuple[Interval, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "on_intervals", tuple(self.on_intervals))
        span = self.cycle.interval
        prev = None
        for iv in self.on_intervals:
            if iv.start < span.start or iv.end > span.end:
                raise ContractError(f"ON interval {iv} outside cycle {span}")
            if prev is not None and iv.start < prev.end:
                raise ContractError(f"ON intervals {prev} and {iv} overlap or are unsorted")
            prev = iv

    def validate_pattern(self, pattern: LteuPattern) -> None:
        """Check chunk lengths and gaps against a pattern."""
        for iv in self.on_intervals:
            if not pattern.ON_min <= iv.length <= pattern.ON_max:
                raise ContractError(f"ON interval {iv} length outside [{pattern.ON_min}, {pattern.ON_max}]")
        for a, b in zip(self.on_intervals, self.on_intervals[1:]):
            if b.start - a.end < pattern.gap:
                raise ContractError(f"gap between {a} and {b} shorter than {pattern.gap}")

    @property
    def total_on(self) -> int:
        return sum(iv.length for iv in self.on_intervals)

    def to_busy_periods(self) -> List[BusyPeriod]:
        return [BusyPeriod(iv.start, BusyLabel.B, iv.length) for iv in self.on_intervals]


def true_duty_cycle(s: OnSchedule) -> float:
    return s.total_on / s.cycle.period_T


def chunk_on_time(total_on: int, pattern: LteuPattern) -> List[int]:
    """Split a cycle's ON total into continuous ON chunks.

    Front-loaded ``ON_max`` chunks; a residual shorter than ``ON_min`` is
    merged into the last full chunk and the pair is split evenly.
    """
    if total_on == 0:
        return []
    if total_on < pattern.ON_min:
        raise InfeasibleScheduleError(
            f"total ON {total_on} ns is below the minimum continuous ON {pattern.ON_min} ns"
        )
    k, r = divmod(total_on, pattern.ON_max)
    chunks = [pattern.ON_max] * k
    if r == 0:
        return chunks
    if r >= pattern.ON_min:
        return chunks + [r]
    pair = pattern.ON_max + r
    a = pair // 2
    b = pair - a
    if a < pattern.ON_min:
        raise InfeasibleScheduleError(
            f"residual {r} ns cannot be rebalanced: halves of {pair} ns are below ON_min {pattern.ON_min} ns"
        )
    return chunks[:-1] + [a, b]


def generate_schedule(alpha: float, pattern: LteuPattern, cycle_start: TimeNs,
                      rng: Optional[np.random.Generator] = None) -> OnSchedule:
    """Lay out ``round(alpha * T)`` ns of ON time in one cycle.

    Chunks start at ``cycle_start`` separated by ``pattern.gap``. With ``rng``
    the whole block is shifted by a uniform offset over the cycle's slack.
    """
    if not 0 <= alpha < 1:
        raise ContractError(f"alpha must lie in [0, 1), got {alpha}")
    T = pattern.period_T
    window = CycleWindow(cycle_start, T)
    chunks = chunk_on_time(round(alpha * T), pattern)
    if not chunks:
        return OnSchedule(window, ())
    span = sum(chunks) + pattern.gap * (len(chunks) - 1)
    if span > T:
        raise InfeasibleScheduleError(
            f"ON time plus gaps ({span} ns) exceeds the cycle period ({T} ns)"
        )
    offset = int(rng.integers(0, T - span + 1)) if rng is not None else 0
    t = cycle_start + offset
    intervals = []
    for c in chunks:
        intervals.append(Interval(t, t + c))
        t += c + pattern.gap
    return OnSchedule(window, tuple(intervals))
