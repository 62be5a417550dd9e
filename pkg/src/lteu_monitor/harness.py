"""Experiment commands: analytical curves, estimate sweeps, detection trials."""
from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

from .config import ExperimentConfig, Setting
from .dcf import run_cycle
from .detector import build_trial_table, empirical_pd_pfa, rates_to_csv, trial_table_to_csv
from .errors import InfeasibleScheduleError
from .estimator import estimate_duty_cycle
from .irwin_hall import curve_to_csv, pd_pfa_curve
from .observer import observe
from .scheduler import OnSchedule, generate_schedule

log = logging.getLogger(__name__)

JOBS_ENV = "LTEU_MONITOR_JOBS"
ALPHA_KEY_SCALE = 10**9


def alpha_key(alpha: float) -> int:
    """Integer key for a duty cycle, used in seed mixing and nowhere else."""
    return round(alpha * ALPHA_KEY_SCALE)


def trial_seed(base_seed: int, period_ns: int, l_max_ns: int, alpha: float, trial: int) -> int:
    """64-bit seed for one trial.

    The key is the setting's values rather than its position in the sweep,
    so adding or reordering settings leaves every existing trial unchanged.
    """
    ss = np.random.SeedSequence([base_seed, period_ns, l_max_ns, alpha_key(alpha), trial])
    return int(ss.generate_state(1, np.uint64)[0])


def offset_rng(seed: int) -> np.random.Generator:
    # disjoint from the per-node streams, which are spawned children of seed
    return np.random.default_rng(np.random.SeedSequence([seed, 1]))


class TrialResult(NamedTuple):
    period_ns: int
    l_max_ns: int
    alpha_true: float
    trial: int
    seed: int
    alpha_hat: Optional[float]
    m: Optional[int]
    merged_on: Optional[int]
    error: str


def count_merged_on(periods, schedule: OnSchedule) -> int:
    """Busy periods that span more than one ON interval."""
    n = 0
    for bp in periods:
        iv = bp.interval
        if sum(1 for on in schedule.on_intervals if iv.intersect(on) is not None) > 1:
            n += 1
    return n


def run_trial(setting: Setting, alpha: float, trial: int, base_seed: int,
              random_offset: bool = False) -> TrialResult:
    """generate_schedule -> run_cycle -> observe -> estimate for one seed."""
    seed = trial_seed(base_seed, setting.period_ns, setting.l_max_ns, alpha, trial)
    rng = offset_rng(seed) if random_offset else None
    try:
        schedule = generate_schedule(alpha, setting.pattern, 0, rng)
    except InfeasibleScheduleError as e:
        return TrialResult(setting.period_ns, setting.l_max_ns, alpha, trial, seed, None, None, None, str(e))
    _, events = run_cycle(setting.wifi, schedule, seed)
    report = observe(events, schedule.cycle)
    est = estimate_duty_cycle(report, setting.est)
    merged = count_merged_on((bp for bp, _ in est.per_period), schedule)
    return TrialResult(setting.period_ns, setting.l_max_ns, alpha, trial, seed, est.alpha_hat, est.m, merged, "")


def _run_task(task) -> TrialResult:
    return run_trial(*task)


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring non-integer %s=%r", JOBS_ENV, raw)
        return 1


def run_trials(cfg: ExperimentConfig, settings: Sequence[Setting], jobs: int = 1) -> List[TrialResult]:
    """All (setting, alpha, trial) combinations, in that order regardless of jobs."""
    tasks = [(s, a, k, cfg.base_seed, cfg.random_offset)
             for s in settings for a in cfg.alphas for k in range(cfg.repeats)]
    if jobs <= 1 or len(tasks) < 2:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


ESTIMATE_HEADER = ["period_ns", "l_max_ns", "alpha_true", "trial", "seed", "alpha_hat", "m", "merged_on", "error"]


def estimates_to_csv(rows: Iterable[TrialResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ESTIMATE_HEADER)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def estimates_from_csv(text: str) -> List[TrialResult]:
    reader = csv.reader(io.StringIO(text))
    if next(reader) != ESTIMATE_HEADER:
        raise ValueError("unexpected estimates header")
    out = []
    for rec in reader:
        if not rec:
            continue
        T, L, a, k, seed, ah, m, merged, err = rec
        out.append(TrialResult(int(T), int(L), float(a), int(k), int(seed),
                               float(ah) if ah else None, int(m) if m else None,
                               int(merged) if merged else None, err))
    return out


def _gamma_tag(g: float) -> str:
    return f"g{g!r}"


def _write(path: Path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def cmd_analyze(cfg: ExperimentConfig, out: Path) -> List[Path]:
    """One analytical Pd/Pfa curve CSV per (gamma, L_max, T)."""
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for s in cfg.settings():
        for g in cfg.gammas:
            curve = pd_pfa_curve(cfg.alphas, gamma=g, alpha_max=cfg.alpha_max, T_ns=s.period_ns,
                                 L_max_ns=s.l_max_ns, ON_max_ns=s.pattern.ON_max)
            path = out / f"curve_{s.tag}_{_gamma_tag(g)}.csv"
            _write(path, curve_to_csv(curve))
            written.append(path)
    return written


def _log_merged(results: Sequence[TrialResult]) -> None:
    merged = sum(r.merged_on or 0 for r in results)
    if merged:
        log.warning("%d busy period(s) spanned more than one ON interval", merged)
    errors = sum(1 for r in results if r.error)
    if errors:
        log.warning("%d trial(s) recorded errors", errors)


def cmd_simulate(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> List[Path]:
    """Per-seed estimates for every setting and duty cycle in one CSV."""
    out.mkdir(parents=True, exist_ok=True)
    results = run_trials(cfg, cfg.settings(), jobs)
    _log_merged(results)
    path = out / "estimates.csv"
    _write(path, estimates_to_csv(results))
    return [path]


def cmd_detect(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> List[Path]:
    """Trial table and Pd/Pfa rates per setting and gamma.

    Trials whose schedule is infeasible go to ``detect_errors.csv`` in the
    estimates schema and are left out of the trial tables.
    """
    out.mkdir(parents=True, exist_ok=True)
    settings = cfg.settings()
    results = run_trials(cfg, settings, jobs)
    _log_merged(results)
    written = []
    for s in settings:
        ok = [r for r in results if (r.period_ns, r.l_max_ns) == (s.period_ns, s.l_max_ns) and not r.error]
        samples = [(r.alpha_true, r.seed, r.alpha_hat) for r in ok]
        for g in cfg.gammas:
            det = cfg.detection(g)
            table = build_trial_table(samples, det)
            tp = out / f"trials_{s.tag}_{_gamma_tag(g)}.csv"
            rp = out / f"rates_{s.tag}_{_gamma_tag(g)}.csv"
            _write(tp, trial_table_to_csv(table))
            _write(rp, rates_to_csv(empirical_pd_pfa(table, det) if table else []))
            written += [tp, rp]
    ep = out / "detect_errors.csv"
    _write(ep, estimates_to_csv(r for r in results if r.error))
    written.append(ep)
    return written
