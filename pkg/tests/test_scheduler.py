import numpy as np
import pytest
from hypothesis import given, strategies as st

from lteu_monitor.errors import ContractError, InfeasibleScheduleError
from lteu_monitor.scheduler import (LteuPattern, OnSchedule, chunk_on_time, generate_schedule,
                                    true_duty_cycle)
from lteu_monitor.timebase import MS, BusyLabel, CycleWindow, Interval

DEFAULT = LteuPattern(period_T=160 * MS)


class TestPattern:
    @pytest.mark.parametrize("kw", [dict(ON_min=0), dict(ON_min=30 * MS), dict(ON_max=200 * MS), dict(gap=0)])
    def test_invalid(self, kw):
        with pytest.raises(ContractError):
            LteuPattern(period_T=160 * MS, **kw)


class TestChunking:
    def test_exact_multiple(self):
        assert chunk_on_time(80 * MS, DEFAULT) == [20 * MS] * 4

    def test_residual_at_least_on_min(self):
        assert chunk_on_time(47 * MS, DEFAULT) == [20 * MS, 20 * MS, 7 * MS]

    def test_small_residual_rebalanced(self):
        # 42 ms: residual 2 ms < ON_min, last pair becomes 11 + 11
        assert chunk_on_time(42 * MS, DEFAULT) == [20 * MS, 11 * MS, 11 * MS]

    def test_odd_residual_split(self):
        assert chunk_on_time(20 * MS + 3, DEFAULT) == [10 * MS + 1, 10 * MS + 2]

    def test_zero(self):
        assert chunk_on_time(0, DEFAULT) == []

    def test_below_on_min(self):
        with pytest.raises(InfeasibleScheduleError):
            chunk_on_time(5 * MS, DEFAULT)

    def test_rebalance_infeasible(self):
        p = LteuPattern(period_T=160 * MS, ON_max=10 * MS, ON_min=8 * MS)
        with pytest.raises(InfeasibleScheduleError):
            chunk_on_time(12 * MS, p)

    @given(st.integers(6 * MS, 150 * MS))
    def test_chunks_respect_bounds(self, total):
        chunks = chunk_on_time(total, DEFAULT)
        assert sum(chunks) == total
        assert all(DEFAULT.ON_min <= c <= DEFAULT.ON_max for c in chunks)


class TestGenerateSchedule:
    def test_front_loaded(self):
        s = generate_schedule(0.5, DEFAULT, 0)
        assert s.on_intervals == (Interval(0, 20 * MS), Interval(22 * MS, 42 * MS),
                                  Interval(44 * MS, 64 * MS), Interval(66 * MS, 86 * MS))
        assert true_duty_cycle(s) == 0.5

    def test_zero_alpha_empty(self):
        assert generate_schedule(0.0, DEFAULT, 0).on_intervals == ()

    def test_too_dense(self):
        with pytest.raises(InfeasibleScheduleError):
            generate_schedule(0.99, DEFAULT, 0)

    def test_alpha_range(self):
        with pytest.raises(ContractError):
            generate_schedule(1.0, DEFAULT, 0)

    def test_cycle_offset(self):
        s = generate_schedule(0.25, DEFAULT, 160 * MS)
        assert s.on_intervals[0].start == 160 * MS
        assert s.cycle == CycleWindow(160 * MS, 160 * MS)

    def test_busy_period_view(self):
        s = generate_schedule(0.25, DEFAULT, 0)
        bps = s.to_busy_periods()
        assert all(bp.label is BusyLabel.B for bp in bps)
        assert sum(bp.d for bp in bps) == s.total_on

    @given(st.floats(0.04, 0.85), st.integers(0, 2**32))
    def test_properties_with_random_offset(self, alpha, seed):
        try:
            s = generate_schedule(alpha, DEFAULT, 0, np.random.default_rng(seed))
        except InfeasibleScheduleError:
            return
        s.validate_pattern(DEFAULT)
        assert s.total_on == round(alpha * DEFAULT.period_T)
        assert abs(true_duty_cycle(s) - alpha) <= 1 / DEFAULT.period_T


class TestOnSchedule:
    def test_overlap_rejected(self):
        with pytest.raises(ContractError):
            OnSchedule(CycleWindow(0, 100), (Interval(0, 10), Interval(5, 20)))

    def test_outside_rejected(self):
        with pytest.raises(ContractError):
            OnSchedule(CycleWindow(0, 100), (Interval(90, 110),))

    def test_validate_pattern_gap(self):
        p = LteuPattern(period_T=100, ON_max=20, ON_min=5, gap=3)
        s = OnSchedule(CycleWindow(0, 100), (Interval(0, 10), Interval(11, 20)))
        with pytest.raises(ContractError):
            s.validate_pattern(p)
