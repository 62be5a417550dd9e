"""Per-cycle duty-cycle estimate from an observer report."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import List, Tuple

from .errors import ContractError, DataInconsistencyError
from .observer import ObserverReport
from .timebase import BusyLabel, BusyPeriod


@dataclass(frozen=True)
class EstimatorParams:
    L_max_ns: int
    L_PH_ns: int

    def __post_init__(self):
        if not 0 < self.L_PH_ns < self.L_max_ns:
            raise ContractError(f"need 0 < L_PH_ns < L_max_ns, got {self.L_PH_ns}, {self.L_max_ns}")


@dataclass(frozen=True)
class DutyCycleEstimate:
    alpha_hat: float
    m: int
    T_ns: int
    per_period: Tuple[Tuple[BusyPeriod, int], ...]

    def to_csv_row(self) -> str:
        return f"{self.alpha_hat!r},{self.m},{self.T_ns}\n"

    def detail_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_ns", "label", "d_ns", "d_prime_ns", "on_hat_ns"])
        for bp, on_hat in self.per_period:
            w.writerow([bp.t, bp.label.value, bp.d, bp.d_prime, on_hat])
        return buf.getvalue()


def select_abnormal(report: ObserverReport, p: EstimatorParams) -> List[BusyPeriod]:
    """Busy periods strictly longer than any Wi-Fi frame could be."""
    return [bp for bp in report.busy_periods if bp.d > p.L_max_ns]


def estimate_on(bp: BusyPeriod, p: EstimatorParams) -> int:
    """Unbiased ON-time estimate for one abnormal busy period.

    The unobserved leading Wi-Fi portion is uniform on [0, d'] for a TX
    period and on [L_PH, d'] for an RX period; subtract its mean.
    """
    if bp.label is BusyLabel.B:
        return bp.d
    dp = bp.d_prime
    if bp.label is BusyLabel.B_TX:
        on_hat = round(bp.d - dp / 2)
    else:
        if dp < p.L_PH_ns:
            raise DataInconsistencyError(
                f"RX period at {bp.t} spent {dp} ns in RX_BUSY, shorter than the preamble ({p.L_PH_ns} ns)"
            )
        on_hat = round(bp.d - (dp + p.L_PH_ns) / 2)
    if on_hat < 0:
        raise DataInconsistencyError(f"negative ON estimate {on_hat} for period at {bp.t}")
    return on_hat


def estimate_duty_cycle(report: ObserverReport, p: EstimatorParams) -> DutyCycleEstimate:
    T = report.window.period_T
    per_period = tuple((bp, estimate_on(bp, p)) for bp in select_abnormal(report, p))
    total = sum(on for _, on in per_period)
    return DutyCycleEstimate(total / T, len(per_period), T, per_period)
