import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lteu_monitor.dcf import OBSERVER, EventKind, SimEvent, WifiParams, run_cycle
from lteu_monitor.errors import StateMachineError
from lteu_monitor.observer import observe
from lteu_monitor.scheduler import LteuPattern, generate_schedule
from lteu_monitor.timebase import MS, US, BusyLabel, CycleWindow, merge_intervals

K = EventKind
WIN = CycleWindow(0, 10_000)


def ev(t, kind, aux=None):
    return SimEvent(t, kind, aux)


def walk(*events, window=WIN):
    return [bp.as_tuple() for bp in observe(list(events), window).busy_periods]


class TestWalks:
    def test_energy_only(self):
        assert walk(ev(100, K.MEDIUM_BUSY_START), ev(600, K.MEDIUM_IDLE_START)) == [(100, BusyLabel.B, 500, 0)]

    def test_own_tx_overlapped_by_on(self):
        out = walk(ev(100, K.MEDIUM_BUSY_START), ev(100, K.OBSERVER_TX_START),
                   ev(300, K.OBSERVER_TX_END), ev(2000, K.MEDIUM_IDLE_START))
        assert out == [(100, BusyLabel.B_TX, 1900, 200)]

    def test_rx_overlapped_by_on(self):
        out = walk(ev(100, K.MEDIUM_BUSY_START), ev(100, K.OBSERVER_RX_PREAMBLE_DETECTED, 500),
                   ev(500, K.OBSERVER_RX_END), ev(3000, K.MEDIUM_IDLE_START))
        assert out == [(100, BusyLabel.B_RX, 2900, 400)]

    def test_plain_frames_are_short_periods(self):
        out = walk(ev(0, K.MEDIUM_BUSY_START), ev(0, K.OBSERVER_RX_PREAMBLE_DETECTED, 50),
                   ev(50, K.OBSERVER_RX_END), ev(50, K.MEDIUM_IDLE_START),
                   ev(66, K.MEDIUM_BUSY_START), ev(66, K.OBSERVER_TX_START),
                   ev(80, K.OBSERVER_TX_END), ev(80, K.MEDIUM_IDLE_START))
        assert out == [(0, BusyLabel.B_RX, 50, 50), (66, BusyLabel.B_TX, 14, 14)]

    def test_on_before_frame_keeps_cca(self):
        # CCA dwell first, then our own TX inside the same busy period
        out = walk(ev(0, K.MEDIUM_BUSY_START), ev(40, K.OBSERVER_TX_START),
                   ev(90, K.OBSERVER_TX_END), ev(120, K.MEDIUM_IDLE_START))
        assert out == [(0, BusyLabel.B_TX, 120, 50)]

    def test_open_period_closed_at_window_end(self):
        out = walk(ev(9_000, K.MEDIUM_BUSY_START))
        assert out == [(9_000, BusyLabel.B, 1_000, 0)]

    def test_period_straddling_window_end_is_cut(self):
        out = walk(ev(9_500, K.MEDIUM_BUSY_START), ev(9_500, K.OBSERVER_RX_PREAMBLE_DETECTED, 10_400),
                   ev(10_400, K.OBSERVER_RX_END), ev(12_000, K.MEDIUM_IDLE_START))
        assert out == [(9_500, BusyLabel.B_RX, 500, 500)]

    def test_sidecar(self):
        rep = observe([], CycleWindow(5, 100))
        assert json.loads(rep.sidecar_json()) == {"window_start_ns": 5, "period_T_ns": 100}
        assert rep.to_csv() == "t_ns,label,d_ns,d_prime_ns\n"


class TestIllegalFeeds:
    @pytest.mark.parametrize("events", [
        [ev(0, K.MEDIUM_BUSY_START), ev(5, K.MEDIUM_BUSY_START)],
        [ev(0, K.MEDIUM_IDLE_START)],
        [ev(0, K.OBSERVER_TX_START)],
        [ev(0, K.MEDIUM_BUSY_START), ev(0, K.OBSERVER_TX_END)],
        [ev(0, K.MEDIUM_BUSY_START), ev(0, K.OBSERVER_RX_END)],
        [ev(0, K.MEDIUM_BUSY_START), ev(0, K.OBSERVER_RX_PREAMBLE_DETECTED, 0)],
        [ev(0, K.MEDIUM_BUSY_START), ev(0, K.OBSERVER_TX_START), ev(10, K.OBSERVER_TX_END),
         ev(10, K.OBSERVER_RX_PREAMBLE_DETECTED, 20)],
        [ev(0, K.MEDIUM_BUSY_START), ev(0, K.OBSERVER_TX_START), ev(5, K.OBSERVER_RX_PREAMBLE_DETECTED, 20)],
        [ev(0, K.MEDIUM_BUSY_START), ev(0, K.OBSERVER_TX_START), ev(5, K.OBSERVER_TX_END),
         ev(8, K.OBSERVER_TX_START)],
        [ev(10, K.MEDIUM_BUSY_START), ev(5, K.MEDIUM_IDLE_START)],
    ])
    def test_rejected(self, events):
        with pytest.raises(StateMachineError):
            observe(events, WIN)


def replay_oracle(timeline, window):
    """Per-microsecond PHY state sampled from the ground-truth timeline."""
    n = window.period_T // US
    end_us = max([window.end] + [iv.end for iv in timeline.busy_intervals()]) // US + 1
    busy = np.zeros(end_us, bool)
    act = np.zeros(end_us, np.int8)  # 0 none, 1 TX, 2 RX
    for iv in timeline.busy_intervals():
        busy[iv.start // US:iv.end // US] = True
    for tx in timeline.wifi_tx:
        iv = tx.interval
        if tx.src == OBSERVER:
            act[iv.start // US:iv.end // US] = 1
        elif tx.rx_detected:
            act[iv.start // US:iv.end // US] = 2
    periods = []
    i = 0
    while i < end_us:
        if not busy[i]:
            i += 1
            continue
        j = i
        while j < end_us and busy[j]:
            j += 1
        lo, hi = max(i, window.start // US), min(j, window.start // US + n)
        if lo < hi:
            seg = act[lo:hi]
            kinds = set(seg[seg > 0].tolist())
            label = {frozenset(): BusyLabel.B, frozenset({1}): BusyLabel.B_TX,
                     frozenset({2}): BusyLabel.B_RX}[frozenset(kinds)]
            periods.append((lo * US, label, (hi - lo) * US, int((seg > 0).sum()) * US))
        i = j
    return periods


class TestAgainstReplay:
    @given(st.integers(0, 2**32), st.sampled_from([0.1, 0.3, 0.5, 0.7]), st.sampled_from([300, 700, 1100]))
    @settings(max_examples=25)
    def test_simulated_cycles(self, seed, alpha, l_max_us):
        w = WifiParams(l_max_ns=l_max_us * US)
        s = generate_schedule(alpha, LteuPattern(80 * MS), 0)
        tl, events = run_cycle(w, s, seed)
        rep = observe(events, s.cycle)
        assert [bp.as_tuple() for bp in rep.busy_periods] == replay_oracle(tl, s.cycle)

    def test_busy_union_matches_timeline(self):
        s = generate_schedule(0.5, LteuPattern(160 * MS), 0)
        tl, events = run_cycle(WifiParams(), s, 77)
        rep = observe(events, s.cycle)
        got = merge_intervals(bp.interval for bp in rep.busy_periods)
        truth = [iv for iv in (x.intersect(s.cycle.interval) for x in merge_intervals(tl.busy_intervals())) if iv]
        assert got == truth
