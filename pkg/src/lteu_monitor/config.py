"""JSON experiment configuration.

All durations are integer nanoseconds and unknown keys are rejected. A
config names lists of cycle periods and maximum frame airtimes; every
combination of the two is one experiment setting.
"""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Tuple

from .detector import DetectionConfig
from .dcf import CollisionSync, DataLenMode, WifiParams
from .errors import ConfigError, ContractError
from .estimator import EstimatorParams
from .scheduler import LteuPattern

log = logging.getLogger(__name__)

_WIFI_KEYS = {
    "n_nodes", "difs_ns", "sifs_ns", "slot_ns", "cw_min", "cw_max", "l_ph_ns", "ack_ns",
    "data_len_mode", "data_len_min_ns", "observer_saturated", "collision_sync",
}
_PATTERN_KEYS = {"on_max_ns", "on_min_ns", "gap_ns", "random_offset"}
_DETECTION_KEYS = {"alpha_max", "gammas"}
_TOP_KEYS = {"wifi", "pattern", "detection", "alphas", "period_ns", "l_max_ns", "repeats", "base_seed"}
_REQUIRED_TOP = {"alphas", "period_ns", "l_max_ns"}


@dataclass(frozen=True)
class Setting:
    """One (cycle period, maximum frame airtime) combination."""

    period_ns: int
    l_max_ns: int
    wifi: WifiParams
    pattern: LteuPattern
    est: EstimatorParams

    @property
    def tag(self) -> str:
        return f"T{self.period_ns}_L{self.l_max_ns}"


@dataclass(frozen=True)
class ExperimentConfig:
    wifi: WifiParams
    pattern: LteuPattern
    random_offset: bool
    alpha_max: float
    gammas: Tuple[float, ...]
    alphas: Tuple[float, ...]
    period_ns: Tuple[int, ...]
    l_max_ns: Tuple[int, ...]
    repeats: int
    base_seed: int

    def detection(self, gamma: float) -> DetectionConfig:
        return DetectionConfig(self.alpha_max, gamma)

    def settings(self) -> List[Setting]:
        out = []
        for T, L in itertools.product(self.period_ns, self.l_max_ns):
            wifi = replace(self.wifi, l_max_ns=L)
            pattern = replace(self.pattern, period_T=T)
            out.append(Setting(T, L, wifi, pattern, EstimatorParams(L, wifi.l_ph_ns)))
        return out


def _check_keys(obj: Any, allowed: set, where: str) -> Dict[str, Any]:
    if not isinstance(obj, dict):
        raise ConfigError(where or "<root>", "expected a JSON object")
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"{where}.{k}" if where else k, "unknown key")
    return obj


def _int(v: Any, field: str, minimum: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(field, f"expected an integer, got {v!r}")
    if v < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {v}")
    return v


def _float(v: Any, field: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(field, f"expected a number, got {v!r}")
    return float(v)


def _list(v: Any, field: str) -> list:
    if not isinstance(v, list):
        raise ConfigError(field, f"expected a list, got {v!r}")
    return v


def parse_config(doc: Dict[str, Any]) -> ExperimentConfig:
    """Validate a decoded JSON document into an ExperimentConfig."""
    _check_keys(doc, _TOP_KEYS, "")
    for k in sorted(_REQUIRED_TOP - doc.keys()):
        raise ConfigError(k, "missing required key")

    alphas = tuple(_float(a, f"alphas[{i}]") for i, a in enumerate(_list(doc["alphas"], "alphas")))
    for i, a in enumerate(alphas):
        if not 0 <= a < 1:
            raise ConfigError(f"alphas[{i}]", f"must lie in [0, 1), got {a}")
    periods = tuple(_int(v, f"period_ns[{i}]", 1) for i, v in enumerate(_list(doc["period_ns"], "period_ns")))
    l_maxes = tuple(_int(v, f"l_max_ns[{i}]", 1) for i, v in enumerate(_list(doc["l_max_ns"], "l_max_ns")))
    if not periods:
        raise ConfigError("period_ns", "needs at least one value")
    if not l_maxes:
        raise ConfigError("l_max_ns", "needs at least one value")
    repeats = _int(doc.get("repeats", 1), "repeats", 1)
    base_seed = _int(doc.get("base_seed", 0), "base_seed", 0)
    if base_seed >= 2**64:
        raise ConfigError("base_seed", "must fit in 64 bits")

    w = _check_keys(doc.get("wifi", {}), _WIFI_KEYS, "wifi")
    wifi_kw = {}
    for k, v in w.items():
        field = f"wifi.{k}"
        if k == "data_len_mode":
            try:
                wifi_kw[k] = DataLenMode(v)
            except ValueError:
                raise ConfigError(field, f"must be one of {[m.value for m in DataLenMode]}") from None
        elif k == "collision_sync":
            try:
                wifi_kw[k] = CollisionSync(v)
            except ValueError:
                raise ConfigError(field, f"must be one of {[m.value for m in CollisionSync]}") from None
        elif k == "observer_saturated":
            if not isinstance(v, bool):
                raise ConfigError(field, "expected a boolean")
            wifi_kw[k] = v
        elif k == "data_len_min_ns":
            wifi_kw[k] = None if v is None else _int(v, field, 1)
        else:
            wifi_kw[k] = _int(v, field, 1)

    p = _check_keys(doc.get("pattern", {}), _PATTERN_KEYS, "pattern")
    random_offset = p.get("random_offset", False)
    if not isinstance(random_offset, bool):
        raise ConfigError("pattern.random_offset", "expected a boolean")
    pattern_kw = {}
    for key, name in (("on_max_ns", "ON_max"), ("on_min_ns", "ON_min"), ("gap_ns", "gap")):
        if key in p:
            pattern_kw[name] = _int(p[key], f"pattern.{key}", 1)

    d = _check_keys(doc.get("detection", {}), _DETECTION_KEYS, "detection")
    alpha_max = _float(d.get("alpha_max", 0.5), "detection.alpha_max")
    gammas = tuple(_float(g, f"detection.gammas[{i}]")
                   for i, g in enumerate(_list(d.get("gammas", [0.0]), "detection.gammas")))
    if not gammas:
        raise ConfigError("detection.gammas", "needs at least one value")

    # Build every component once per setting so their own invariants run here.
    try:
        wifi = WifiParams(l_max_ns=l_maxes[0], **wifi_kw)
    except ContractError as e:
        raise ConfigError("wifi", str(e)) from None
    try:
        pattern = LteuPattern(period_T=periods[0], **pattern_kw)
    except ContractError as e:
        raise ConfigError("pattern", str(e)) from None
    for i, g in enumerate(gammas):
        try:
            DetectionConfig(alpha_max, g)
        except ContractError as e:
            raise ConfigError(f"detection.gammas[{i}]", str(e)) from None

    cfg = ExperimentConfig(wifi, pattern, random_offset, alpha_max, gammas, alphas,
                           periods, l_maxes, repeats, base_seed)
    for i, T in enumerate(periods):
        try:
            replace(pattern, period_T=T)
        except ContractError as e:
            raise ConfigError(f"period_ns[{i}]", str(e)) from None
    for i, L in enumerate(l_maxes):
        try:
            w = replace(wifi, l_max_ns=L)
            EstimatorParams(L, w.l_ph_ns)
        except ContractError as e:
            raise ConfigError(f"l_max_ns[{i}]", str(e)) from None
        if pattern.ON_min <= L:
            raise ConfigError(f"l_max_ns[{i}]",
                              f"minimum continuous ON ({pattern.ON_min} ns) must exceed the maximum frame ({L} ns)")
        if pattern.gap <= L + wifi.difs_ns:
            log.warning("gap %d ns <= l_max %d ns + DIFS: frames may bridge two ON periods", pattern.gap, L)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError("<file>", f"cannot read {path}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"invalid JSON: {e}") from None
    return parse_config(doc)
