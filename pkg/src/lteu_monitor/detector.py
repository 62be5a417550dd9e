"""Threshold test on the duty-cycle estimate and empirical Pd/Pfa."""
from __future__ import annotations

import csv
import io
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple

from scipy.stats import binomtest

from .errors import ContractError
from .irwin_hall import role_for

VIOLATED = "Violated"
NOT_VIOLATED = "NotViolated"


@dataclass(frozen=True)
class DetectionConfig:
    alpha_max: float
    gamma: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha_max < 1:
            raise ContractError(f"alpha_max must lie in (0, 1), got {self.alpha_max}")
        if self.gamma < 0:
            raise ContractError(f"gamma must be >= 0, got {self.gamma}")
        if self.threshold >= 1:
            raise ContractError(f"(1 + gamma) * alpha_max = {self.threshold} must stay below 1")

    @property
    def threshold(self) -> float:
        return (1.0 + self.gamma) * self.alpha_max


@dataclass(frozen=True)
class Verdict:
    violated: bool
    alpha_hat: float

    @property
    def name(self) -> str:
        return VIOLATED if self.violated else NOT_VIOLATED


def decide(alpha_hat: float, cfg: DetectionConfig) -> Verdict:
    if alpha_hat < 0:
        raise ContractError(f"alpha_hat must be >= 0, got {alpha_hat}")
    return Verdict(alpha_hat > cfg.threshold, alpha_hat)


class TrialRow(NamedTuple):
    alpha_true: float
    seed: int
    alpha_hat: float
    verdict: str


class RateRow(NamedTuple):
    alpha_true: float
    role: str
    rate: float
    ci_lo: float
    ci_hi: float
    n: int


def build_trial_table(samples: Iterable[tuple], cfg: DetectionConfig) -> List[TrialRow]:
    """Rows from ``(alpha_true, seed, alpha_hat)``, sorted by (alpha_true, seed)."""
    rows = [TrialRow(a, s, ah, decide(ah, cfg).name) for a, s, ah in samples]
    rows.sort(key=lambda r: (r.alpha_true, r.seed))
    seen = set()
    for r in rows:
        if (r.alpha_true, r.seed) in seen:
            raise ContractError(f"duplicate seed {r.seed} for alpha {r.alpha_true}")
        seen.add((r.alpha_true, r.seed))
    return rows


def empirical_pd_pfa(table: Iterable[TrialRow], cfg: DetectionConfig) -> List[RateRow]:
    """Violation rate per true duty cycle, with Wilson 95% intervals.

    Verdicts are recomputed from the stored estimates under ``cfg``.
    """
    groups = OrderedDict()
    for r in sorted(table, key=lambda r: r.alpha_true):
        groups.setdefault(r.alpha_true, []).append(r.alpha_hat)
    out = []
    for alpha, hats in groups.items():
        n = len(hats)
        if n == 0:
            raise ContractError(f"no trials for alpha {alpha}")
        k = sum(decide(h, cfg).violated for h in hats)
        ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
        out.append(RateRow(alpha, role_for(alpha, cfg.alpha_max), k / n, float(ci.low), float(ci.high), n))
    return out


def trial_table_to_csv(rows: Iterable[TrialRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha_true", "seed", "alpha_hat", "verdict"])
    for r in rows:
        w.writerow([repr(r.alpha_true), r.seed, repr(r.alpha_hat), r.verdict])
    return buf.getvalue()


def trial_table_from_csv(text: str) -> List[TrialRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["alpha_true", "seed", "alpha_hat", "verdict"]:
        raise ContractError(f"unexpected trial-table header {header!r}")
    rows = []
    for rec in reader:
        if rec:
            if rec[3] not in (VIOLATED, NOT_VIOLATED):
                raise ContractError(f"unknown verdict {rec[3]!r}")
            rows.append(TrialRow(float(rec[0]), int(rec[1]), float(rec[2]), rec[3]))
    return rows


def rates_to_csv(rows: Iterable[RateRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha_true", "role", "rate", "ci_lo", "ci_hi", "n"])
    for r in rows:
        w.writerow([repr(r.alpha_true), r.role, repr(r.rate), repr(r.ci_lo), repr(r.ci_hi), r.n])
    return buf.getvalue()
