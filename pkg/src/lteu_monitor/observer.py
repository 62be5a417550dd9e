"""Replay of the observer AP's PHY state machine into labelled busy periods."""
from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .dcf import EventKind, SimEvent
from .errors import StateMachineError
from .timebase import (BusyLabel, BusyPeriod, CycleWindow, Interval, TimeNs,
                       busy_periods_to_csv, clip_to_cycle)


class PhyState(enum.Enum):
    IDLE = "IDLE"
    CCA_BUSY = "CCA_BUSY"
    TX_BUSY = "TX_BUSY"
    RX_BUSY = "RX_BUSY"


_ILLEGAL = {
    (PhyState.TX_BUSY, PhyState.RX_BUSY),
    (PhyState.RX_BUSY, PhyState.TX_BUSY),
}


@dataclass(frozen=True)
class ObserverReport:
    busy_periods: Tuple[BusyPeriod, ...]
    window: CycleWindow

    def to_csv(self) -> str:
        return busy_periods_to_csv(self.busy_periods)

    def sidecar_json(self) -> str:
        return json.dumps({"window_start_ns": self.window.start, "period_T_ns": self.window.period_T})


class _Period:
    __slots__ = ("start", "label", "active_start", "active_end")

    def __init__(self, start):
        self.start = start
        self.label = BusyLabel.B
        self.active_start = None
        self.active_end = None


def observe(events: Sequence[SimEvent], window: CycleWindow) -> ObserverReport:
    """Walk IDLE/CCA_BUSY/TX_BUSY/RX_BUSY over the event feed.

    Events sharing a timestamp are applied together before the state is
    re-derived, so e.g. a frame start is IDLE -> TX_BUSY with no CCA dwell.
    """
    busy = False
    tx = False
    rx_until: Optional[TimeNs] = None
    state = PhyState.IDLE
    last_t = None
    cur: Optional[_Period] = None
    periods: List[BusyPeriod] = []

    for now, group in itertools.groupby(events, key=lambda ev: ev.time):
        if last_t is not None and now < last_t:
            raise StateMachineError(f"event at {now} after event at {last_t}: feed not time-ordered")
        last_t = now
        for ev in group:
            k = ev.kind
            if k is EventKind.MEDIUM_BUSY_START:
                if busy:
                    raise StateMachineError(f"{k.value} at {now} while medium already busy")
                busy = True
            elif k is EventKind.MEDIUM_IDLE_START:
                if not busy:
                    raise StateMachineError(f"{k.value} at {now} while medium already idle")
                busy = False
            elif k is EventKind.OBSERVER_TX_START:
                if tx:
                    raise StateMachineError(f"{k.value} at {now} while already transmitting")
                tx = True
            elif k is EventKind.OBSERVER_TX_END:
                if not tx:
                    raise StateMachineError(f"{k.value} at {now} without a transmission")
                tx = False
            elif k is EventKind.OBSERVER_RX_PREAMBLE_DETECTED:
                if rx_until is not None:
                    raise StateMachineError(f"{k.value} at {now} while already receiving")
                if ev.payload_end is None or ev.payload_end <= now:
                    raise StateMachineError(f"{k.value} at {now} with bad payload end {ev.payload_end}")
                rx_until = ev.payload_end
            elif k is EventKind.OBSERVER_RX_END:
                if rx_until is None:
                    raise StateMachineError(f"{k.value} at {now} without a reception")
                rx_until = None

        if tx and rx_until is not None:
            raise StateMachineError(f"simultaneous TX and RX at {now}")
        if (tx or rx_until is not None) and not busy:
            raise StateMachineError(f"TX/RX active at {now} on an idle medium")
        new = (PhyState.TX_BUSY if tx else PhyState.RX_BUSY if rx_until is not None
               else PhyState.CCA_BUSY if busy else PhyState.IDLE)
        if new is state:
            continue
        if (state, new) in _ILLEGAL:
            raise StateMachineError(f"illegal transition {state.value} -> {new.value} at {now}")

        if state is PhyState.IDLE:
            cur = _Period(now)
        if state in (PhyState.TX_BUSY, PhyState.RX_BUSY):
            cur.active_end = now
        if new in (PhyState.TX_BUSY, PhyState.RX_BUSY):
            if cur.active_start is not None:
                raise StateMachineError(f"{new.value} visited twice in the busy period opened at {cur.start}")
            cur.active_start = now
            cur.label = BusyLabel.B_TX if new is PhyState.TX_BUSY else BusyLabel.B_RX
        if new is PhyState.IDLE:
            periods.append(_close(cur, now))
            cur = None
        state = new

    if cur is not None:
        # feed ended mid-period: close it at the window edge
        close_at = max(window.end, last_t)
        if cur.active_start is not None and cur.active_end is None:
            cur.active_end = close_at
        periods.append(_close(cur, close_at))

    return ObserverReport(tuple(clip_to_cycle(periods, window)), window)


def _close(p: _Period, now: TimeNs) -> BusyPeriod:
    active = Interval(p.active_start, p.active_end) if p.active_start is not None else None
    return BusyPeriod(p.start, p.label, now - p.start, active)
