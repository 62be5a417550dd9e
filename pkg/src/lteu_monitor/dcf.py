"""Seeded DCF simulation of saturated Wi-Fi nodes next to a duty-cycled LTE-U cell.

Node 0 is the observer AP; nodes 1..n-1 are its clients. Clients send uplink
data to the AP, the AP sends downlink data to a random client. Everything
shares one collision domain with perfect carrier sense, and the LTE-U cell
is sensed through energy detection whenever it is ON.
"""
from __future__ import annotations

import bisect
import csv
import enum
import heapq
import io
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ContractError
from .scheduler import OnSchedule
from .timebase import US, Interval, TimeNs

OBSERVER = 0


class DataLenMode(enum.Enum):
    CONSTANT = "constant"
    UNIFORM = "uniform"


class CollisionSync(enum.Enum):
    """When the observer can lock onto a collision's preamble."""

    IDENTICAL_HEADER = "identical_header"
    NEVER = "never"


@dataclass(frozen=True)
class WifiParams:
    n_nodes: int = 21
    difs_ns: int = 34 * US
    sifs_ns: int = 16 * US
    slot_ns: int = 9 * US
    cw_min: int = 16
    cw_max: int = 1024
    l_max_ns: int = 1100 * US
    l_ph_ns: int = 40 * US
    ack_ns: int = 44 * US
    data_len_mode: DataLenMode = DataLenMode.CONSTANT
    data_len_min_ns: Optional[int] = None
    observer_saturated: bool = True
    collision_sync: CollisionSync = CollisionSync.IDENTICAL_HEADER

    def __post_init__(self):
        if isinstance(self.data_len_mode, str):
            object.__setattr__(self, "data_len_mode", DataLenMode(self.data_len_mode))
        if isinstance(self.collision_sync, str):
            object.__setattr__(self, "collision_sync", CollisionSync(self.collision_sync))
        if self.n_nodes < 1:
            raise ContractError(f"n_nodes must be >= 1 (the observer AP), got {self.n_nodes}")
        if self.observer_saturated and self.n_nodes < 2:
            raise ContractError("a saturated observer needs at least one client to send to")
        for name in ("difs_ns", "sifs_ns", "slot_ns", "l_max_ns", "l_ph_ns", "ack_ns"):
            if getattr(self, name) <= 0:
                raise ContractError(f"{name} must be positive")
        for name in ("cw_min", "cw_max"):
            v = getattr(self, name)
            if v < 1 or v & (v - 1):
                raise ContractError(f"{name} must be a power of two, got {v}")
        if self.cw_min > self.cw_max:
            raise ContractError("cw_min exceeds cw_max")
        if self.l_ph_ns >= self.l_max_ns:
            raise ContractError("l_ph_ns must be shorter than l_max_ns")
        if self.data_len_mode is DataLenMode.UNIFORM:
            lo = self.data_len_min_ns
            if lo is None or not self.l_ph_ns <= lo <= self.l_max_ns:
                raise ContractError("uniform data_len_mode needs l_ph_ns <= data_len_min_ns <= l_max_ns")


class FrameKind(enum.Enum):
    DATA = "data"
    ACK = "ack"
    COLLISION = "collision"


@dataclass(frozen=True)
class WifiTx:
    interval: Interval
    kind: FrameKind
    src: int
    dst: int
    # observer synchronised to this frame's preamble (never set for its own frames)
    rx_detected: bool = False


@dataclass(frozen=True)
class MediumTimeline:
    wifi_tx: Tuple[WifiTx, ...]
    lteu_on: OnSchedule

    def busy_intervals(self) -> List[Interval]:
        return [tx.interval for tx in self.wifi_tx] + list(self.lteu_on.on_intervals)

    def to_csv(self) -> str:
        rows = [(iv.start, iv.end, "lteu", "on") for iv in self.lteu_on.on_intervals]
        rows += [(tx.interval.start, tx.interval.end, f"wifi{tx.src}", tx.kind.value) for tx in self.wifi_tx]
        rows.sort()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["start_ns", "end_ns", "source", "kind"])
        w.writerows(rows)
        return buf.getvalue()


class EventKind(enum.Enum):
    MEDIUM_BUSY_START = "MediumBusyStart"
    MEDIUM_IDLE_START = "MediumIdleStart"
    OBSERVER_TX_START = "ObserverTxStart"
    OBSERVER_TX_END = "ObserverTxEnd"
    OBSERVER_RX_PREAMBLE_DETECTED = "ObserverRxPreambleDetected"
    OBSERVER_RX_END = "ObserverRxEnd"


# tie-break for simultaneous events: endings before beginnings
_EVENT_RANK = {
    EventKind.OBSERVER_TX_END: 0,
    EventKind.OBSERVER_RX_END: 1,
    EventKind.MEDIUM_IDLE_START: 2,
    EventKind.MEDIUM_BUSY_START: 3,
    EventKind.OBSERVER_TX_START: 4,
    EventKind.OBSERVER_RX_PREAMBLE_DETECTED: 5,
}


@dataclass(frozen=True)
class SimEvent:
    time: TimeNs
    kind: EventKind
    payload_end: Optional[TimeNs] = None

    @property
    def sort_key(self):
        return (self.time, _EVENT_RANK[self.kind])


def events_to_csv(events: Sequence[SimEvent]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time_ns", "kind", "aux_ns"])
    for ev in events:
        w.writerow([ev.time, ev.kind.value, "" if ev.payload_end is None else ev.payload_end])
    return buf.getvalue()


def node_streams(seed: int, n: int) -> List[np.random.Generator]:
    """One independent PCG64 stream per node, spawned from the run seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


class _OnIndex:
    def __init__(self, schedule: OnSchedule):
        self.intervals = schedule.on_intervals
        self.starts = [iv.start for iv in self.intervals]

    def covering(self, t: TimeNs) -> Optional[Interval]:
        i = bisect.bisect_right(self.starts, t) - 1
        if i >= 0 and t < self.intervals[i].end:
            return self.intervals[i]
        return None

    def starts_within(self, lo: TimeNs, hi: TimeNs) -> bool:
        """True if some ON interval starts strictly inside (lo, hi)."""
        i = bisect.bisect_right(self.starts, lo)
        return i < len(self.starts) and self.starts[i] < hi


def run_cycle(wifi: WifiParams, schedule: OnSchedule, seed: int,
              rngs: Optional[Sequence] = None) -> Tuple[MediumTimeline, List[SimEvent]]:
    """Simulate one LTE-U cycle of saturated DCF contention.

    Contention starts fresh at the cycle start with an idle medium. No new
    transmission starts at or after the cycle end; ones in flight complete.
    ``rngs`` overrides the per-node generators (anything with ``integers``).
    """
    for iv in schedule.on_intervals:
        if iv.length <= wifi.l_max_ns:
            raise ContractError(
                f"ON interval {iv} is not longer than the maximum Wi-Fi frame ({wifi.l_max_ns} ns)"
            )
    n = wifi.n_nodes
    if rngs is None:
        rngs = node_streams(seed, n)
    elif len(rngs) != n:
        raise ContractError(f"expected {n} generators, got {len(rngs)}")

    contenders = [i for i in range(n) if i != OBSERVER or wifi.observer_saturated]
    cw = [wifi.cw_min] * n
    backoff = [0] * n
    for i in contenders:
        backoff[i] = int(rngs[i].integers(0, cw[i]))

    def frame_len(i):
        if wifi.data_len_mode is DataLenMode.CONSTANT:
            return wifi.l_max_ns
        return int(rngs[i].integers(wifi.data_len_min_ns, wifi.l_max_ns + 1))

    def finish(i, success):
        cw[i] = wifi.cw_min if success else min(2 * cw[i], wifi.cw_max)
        backoff[i] = int(rngs[i].integers(0, cw[i]))

    on = _OnIndex(schedule)
    ons = on.intervals
    end = schedule.cycle.end
    t = schedule.cycle.start
    j = 0
    txs: List[WifiTx] = []

    while contenders:
        while j < len(ons) and ons[j].end <= t:
            j += 1
        if j < len(ons) and ons[j].start <= t:
            t = ons[j].end
            continue
        b_min = min(backoff[i] for i in contenders)
        countdown = t + wifi.difs_ns
        t_tx = countdown + b_min * wifi.slot_ns
        if t_tx >= end:
            break
        if j < len(ons) and ons[j].start <= t_tx:
            # LTE-U turns on first: count the idle slots that elapsed, then freeze
            s = ons[j].start
            k = (s - countdown) // wifi.slot_ns if s >= countdown else 0
            if k:
                for i in contenders:
                    backoff[i] -= k
            t = ons[j].end
            continue

        winners = [i for i in contenders if backoff[i] == b_min]
        for i in contenders:
            backoff[i] -= b_min

        if len(winners) == 1:
            w = winners[0]
            dst = int(rngs[w].integers(1, n)) if w == OBSERVER else OBSERVER
            data = Interval(t_tx, t_tx + frame_len(w))
            txs.append(WifiTx(data, FrameKind.DATA, w, dst))
            ack_start = data.end + wifi.sifs_ns
            if on.covering(ack_start) is not None:
                finish(w, success=False)
                t = data.end
            else:
                ack = Interval(ack_start, ack_start + wifi.ack_ns)
                txs.append(WifiTx(ack, FrameKind.ACK, dst, w))
                finish(w, success=True)
                t = ack.end
        else:
            t = t_tx
            for w in winners:
                dst = int(rngs[w].integers(1, n)) if w == OBSERVER else OBSERVER
                iv = Interval(t_tx, t_tx + frame_len(w))
                txs.append(WifiTx(iv, FrameKind.COLLISION, w, dst))
                t = max(t, iv.end)
                finish(w, success=False)

    txs = _mark_detection(txs, on, wifi)
    timeline = MediumTimeline(tuple(txs), schedule)
    return timeline, build_event_feed(timeline)


def _mark_detection(txs: List[WifiTx], on: _OnIndex, wifi: WifiParams) -> List[WifiTx]:
    """Decide which frames the observer synchronises to.

    A lone frame is detected unless an ON period starts inside its
    preamble/header. Colliding frames that all have the same airtime carry
    bit-identical PHY headers, so their superposition still decodes as one
    header and the observer enters RX for that airtime; colliding frames of
    different lengths garble the header and only raise CCA. The observer
    never receives while it is itself one of the transmitters.
    """
    by_start = {}
    for tx in txs:
        if tx.kind is FrameKind.COLLISION:
            by_start.setdefault(tx.interval.start, []).append(tx)
    synced = set()
    for start, group in by_start.items():
        if wifi.collision_sync is CollisionSync.NEVER or any(tx.src == OBSERVER for tx in group):
            continue
        if len({tx.interval.end for tx in group}) == 1:
            synced.add(id(group[0]))

    out = []
    for tx in txs:
        eligible = tx.src != OBSERVER and (tx.kind is not FrameKind.COLLISION or id(tx) in synced)
        fs = tx.interval.start
        # an ON start inside the preamble/header corrupts it
        if eligible and not on.starts_within(fs, fs + wifi.l_ph_ns):
            tx = WifiTx(tx.interval, tx.kind, tx.src, tx.dst, rx_detected=True)
        out.append(tx)
    return out


def build_event_feed(timeline: MediumTimeline) -> List[SimEvent]:
    """Medium busy/idle edges plus the observer's own TX/RX primitives."""
    queue = []
    for iv in timeline.busy_intervals():
        heapq.heappush(queue, (iv.start, 1))
        heapq.heappush(queue, (iv.end, -1))
    events: List[SimEvent] = []
    active = 0
    while queue:
        now = queue[0][0]
        before = active
        while queue and queue[0][0] == now:
            active += heapq.heappop(queue)[1]
        if before == 0 and active > 0:
            events.append(SimEvent(now, EventKind.MEDIUM_BUSY_START))
        elif before > 0 and active == 0:
            events.append(SimEvent(now, EventKind.MEDIUM_IDLE_START))

    for tx in timeline.wifi_tx:
        iv = tx.interval
        if tx.src == OBSERVER:
            events.append(SimEvent(iv.start, EventKind.OBSERVER_TX_START))
            events.append(SimEvent(iv.end, EventKind.OBSERVER_TX_END))
        elif tx.rx_detected:
            events.append(SimEvent(iv.start, EventKind.OBSERVER_RX_PREAMBLE_DETECTED, iv.end))
            events.append(SimEvent(iv.end, EventKind.OBSERVER_RX_END))
    events.sort(key=lambda ev: ev.sort_key)
    return events
