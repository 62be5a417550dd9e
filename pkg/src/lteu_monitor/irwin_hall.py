"""Irwin-Hall CDF and the closed-form exceedance model for the detector.

The estimator's overlap error is modelled as ``L_max / T * (Y - m/2)`` with
``Y`` the sum of ``m`` independent Unif[0, 1] variables, so the probability
that the estimate crosses the detection threshold is an Irwin-Hall tail.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, NamedTuple

from .errors import ContractError

MAX_TERMS = 64
_EXCESS_TOL = 1e-9


def irwin_hall_cdf(m: int, y: float) -> float:
    """P(U_1 + ... + U_m <= y) for iid Unif[0, 1].

    The alternating sum is evaluated in exact rational arithmetic (``y`` is a
    binary float, hence an exact rational), so there is no cancellation error
    and the only rounding is the final conversion.
    """
    if not isinstance(m, int) or isinstance(m, bool) or not 1 <= m <= MAX_TERMS:
        raise ContractError(f"m must be an integer in [1, {MAX_TERMS}], got {m!r}")
    if math.isnan(y):
        raise ContractError("y is NaN")
    if y <= 0:
        return 0.0
    if y >= m:
        return 1.0
    yq = Fraction(y)
    acc = Fraction(0)
    for k in range(math.floor(yq) + 1):
        term = math.comb(m, k) * (yq - k) ** m
        acc += -term if k % 2 else term
    value = float(acc / math.factorial(m))
    return _clamp_probability(value)


def _clamp_probability(p: float) -> float:
    if p < 0.0:
        if p < -_EXCESS_TOL:
            raise ArithmeticError(f"CDF evaluated to {p}")
        return 0.0
    if p > 1.0:
        if p > 1.0 + _EXCESS_TOL:
            raise ArithmeticError(f"CDF evaluated to {p}")
        return 1.0
    return p


def gaussian_cdf_approx(m: int, y: float) -> float:
    """Normal N(m/2, m/12) approximation, for cross-checks only."""
    sigma = math.sqrt(m / 12.0)
    return 0.5 * (1.0 + math.erf((y - m / 2.0) / (sigma * math.sqrt(2.0))))


@dataclass(frozen=True)
class AnalyticalModelParams:
    """Worst-case overlap model: every ON period overlaps an ``L_max`` packet."""

    alpha: float
    gamma: float
    alpha_max: float
    T_ns: int
    L_max_ns: int
    ON_max_ns: int

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ContractError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.alpha_max < 1:
            raise ContractError(f"alpha_max must lie in (0, 1), got {self.alpha_max}")
        if self.gamma < 0:
            raise ContractError(f"gamma must be >= 0, got {self.gamma}")
        if self.T_ns <= 0:
            raise ContractError(f"T_ns must be positive, got {self.T_ns}")
        if not 0 < self.L_max_ns < self.ON_max_ns <= self.T_ns:
            raise ContractError(
                f"need 0 < L_max_ns < ON_max_ns <= T_ns, got "
                f"{self.L_max_ns}, {self.ON_max_ns}, {self.T_ns}"
            )

    @property
    def n_on_periods(self) -> int:
        # ceil(alpha*T / ON_max) on the same integer-ns ON total the scheduler uses
        total_on = round(self.alpha * self.T_ns)
        return -(-total_on // self.ON_max_ns)

    @property
    def cdf_argument(self) -> float:
        m = self.n_on_periods
        threshold = (1.0 + self.gamma) * self.alpha_max
        return m / 2.0 + (self.T_ns / self.L_max_ns) * (threshold - self.alpha)


def exceedance_probability(p: AnalyticalModelParams) -> float:
    """Pr{alpha_hat > (1 + gamma) * alpha_max} under the worst-case model.

    Read as the detection probability when ``alpha > alpha_max`` and as the
    false-alarm probability otherwise.
    """
    return 1.0 - irwin_hall_cdf(p.n_on_periods, p.cdf_argument)


class CurvePoint(NamedTuple):
    alpha: float
    probability: float
    role: str


def role_for(alpha: float, alpha_max: float) -> str:
    return "Pd" if alpha > alpha_max else "Pfa"


def pd_pfa_curve(alphas: Iterable[float], *, gamma: float, alpha_max: float,
                 T_ns: int, L_max_ns: int, ON_max_ns: int) -> List[CurvePoint]:
    rows = []
    for a in alphas:
        p = AnalyticalModelParams(a, gamma, alpha_max, T_ns, L_max_ns, ON_max_ns)
        rows.append(CurvePoint(a, exceedance_probability(p), role_for(a, alpha_max)))
    return rows


def curve_to_csv(rows: Iterable[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "probability", "role"])
    for r in rows:
        w.writerow([repr(r.alpha), repr(r.probability), r.role])
    return buf.getvalue()
