"""Integer-nanosecond time, intervals and busy-period records.

All simulation times are plain ``int`` nanoseconds. Floating point only shows
up in estimates and probabilities.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from .errors import ContractError

TimeNs = int

US = 1_000
MS = 1_000_000


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open span ``[start, end)``; never empty."""

    start: TimeNs
    end: TimeNs

    def __post_init__(self):
        if self.start >= self.end:
            raise ContractError(f"empty or reversed interval [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        lo = max(self.start, other.start)
        hi = min(self.end, other.end)
        return Interval(lo, hi) if lo < hi else None

    def contains(self, t: TimeNs) -> bool:
        return self.start <= t < self.end


class BusyLabel(enum.Enum):
    B = "B"
    B_TX = "B_TX"
    B_RX = "B_RX"


@dataclass(frozen=True)
class CycleWindow:
    start: TimeNs
    period_T: int

    def __post_init__(self):
        if self.period_T <= 0:
            raise ContractError(f"period_T must be positive, got {self.period_T}")

    @property
    def end(self) -> TimeNs:
        return self.start + self.period_T

    @property
    def interval(self) -> Interval:
        return Interval(self.start, self.end)


@dataclass(frozen=True)
class BusyPeriod:
    """One observed busy period.

    ``active`` is the absolute TX_BUSY/RX_BUSY sub-interval, kept so a period
    can be split at a cycle boundary. The 4-tuple ``(t, label, d, d_prime)``
    is the reported view.
    """

    t: TimeNs
    label: BusyLabel
    d: int
    active: Optional[Interval] = None

    def __post_init__(self):
        if self.d <= 0:
            raise ContractError(f"busy period at {self.t} has non-positive duration {self.d}")
        if self.label is BusyLabel.B:
            if self.active is not None:
                raise ContractError(f"label B period at {self.t} carries a TX/RX span")
        else:
            if self.active is None:
                raise ContractError(f"{self.label.value} period at {self.t} has no TX/RX span")
            if self.active.start < self.t or self.active.end > self.end:
                raise ContractError(f"TX/RX span {self.active} outside period [{self.t}, {self.end})")

    @property
    def end(self) -> TimeNs:
        return self.t + self.d

    @property
    def d_prime(self) -> int:
        return 0 if self.active is None else self.active.length

    @property
    def interval(self) -> Interval:
        return Interval(self.t, self.end)

    def as_tuple(self):
        return (self.t, self.label, self.d, self.d_prime)


def _check_ordered(periods: Sequence[BusyPeriod]) -> None:
    for prev, cur in zip(periods, periods[1:]):
        if cur.t < prev.t:
            raise ContractError(f"busy periods not sorted: {prev.t} then {cur.t}")
        if cur.t < prev.end:
            raise ContractError(f"busy periods overlap: [{prev.t}, {prev.end}) and [{cur.t}, {cur.end})")


def clip_to_cycle(periods: Sequence[BusyPeriod], window: CycleWindow) -> List[BusyPeriod]:
    """Intersect busy periods with one cycle window.

    A straddling period is cut; its TX/RX span is cut the same way. A fragment
    whose TX/RX span falls entirely outside it is relabelled ``B``.
    """
    _check_ordered(periods)
    span = window.interval
    out = []
    for bp in periods:
        frag = bp.interval.intersect(span)
        if frag is None:
            continue
        if frag == bp.interval:
            out.append(bp)
            continue
        active = bp.active.intersect(frag) if bp.active is not None else None
        label = bp.label if active is not None else BusyLabel.B
        out.append(BusyPeriod(frag.start, label, frag.length, active))
    return out


CSV_HEADER = ["t_ns", "label", "d_ns", "d_prime_ns"]


def write_busy_periods_csv(periods: Iterable[BusyPeriod], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for bp in periods:
        w.writerow([bp.t, bp.label.value, bp.d, bp.d_prime])


def busy_periods_to_csv(periods: Iterable[BusyPeriod]) -> str:
    buf = io.StringIO()
    write_busy_periods_csv(periods, buf)
    return buf.getvalue()


def read_busy_periods_csv(fh) -> List[BusyPeriod]:
    """Parse the 4-column CSV view.

    The TX/RX span is not serialized; it is restored as the leading ``d'`` of
    the period, which is where the observer always places it.
    """
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != CSV_HEADER:
        raise ContractError(f"unexpected busy-period CSV header {header!r}")
    out = []
    for row in reader:
        if not row:
            continue
        t, label, d, dp = int(row[0]), BusyLabel(row[1]), int(row[2]), int(row[3])
        if label is BusyLabel.B:
            if dp != 0:
                raise ContractError(f"label B row at {t} has d_prime {dp}")
            active = None
        else:
            active = Interval(t, t + dp)
        out.append(BusyPeriod(t, label, d, active))
    _check_ordered(out)
    return out


def busy_periods_from_csv(text: str) -> List[BusyPeriod]:
    return read_busy_periods_csv(io.StringIO(text))


def merge_intervals(intervals: Iterable[Interval]) -> List[Interval]:
    """Union of half-open intervals as a sorted, disjoint, non-adjacent list."""
    merged: List[Interval] = []
    for iv in sorted(intervals):
        if merged and iv.start <= merged[-1].end:
            if iv.end > merged[-1].end:
                merged[-1] = Interval(merged[-1].start, iv.end)
        else:
            merged.append(iv)
    return merged
