"""Duty-cycle monitoring of LTE-U cells from a Wi-Fi AP's PHY busy periods.

Pipeline: ``generate_schedule`` -> ``run_cycle`` -> ``observe`` ->
``estimate_duty_cycle`` -> ``decide``, with ``exceedance_probability`` as the
analytical counterpart of the empirical detection rates.
"""
from .dcf import CollisionSync, DataLenMode, WifiParams, build_event_feed, run_cycle
from .detector import DetectionConfig, Verdict, decide, empirical_pd_pfa
from .errors import (ConfigError, ContractError, DataInconsistencyError, InfeasibleScheduleError,
                     StateMachineError)
from .estimator import EstimatorParams, estimate_duty_cycle, estimate_on
from .irwin_hall import AnalyticalModelParams, exceedance_probability, irwin_hall_cdf, pd_pfa_curve
from .observer import ObserverReport, observe
from .scheduler import LteuPattern, OnSchedule, generate_schedule, true_duty_cycle
from .timebase import MS, US, BusyLabel, BusyPeriod, CycleWindow, Interval

__all__ = [
    "AnalyticalModelParams", "BusyLabel", "BusyPeriod", "CollisionSync", "ConfigError",
    "ContractError", "CycleWindow", "DataInconsistencyError", "DataLenMode", "DetectionConfig",
    "EstimatorParams", "InfeasibleScheduleError", "Interval", "LteuPattern", "MS", "ObserverReport",
    "OnSchedule", "StateMachineError", "US", "Verdict", "WifiParams", "build_event_feed", "decide",
    "empirical_pd_pfa", "estimate_duty_cycle", "estimate_on", "exceedance_probability",
    "generate_schedule", "irwin_hall_cdf", "observe", "pd_pfa_curve", "run_cycle", "true_duty_cycle",
]
