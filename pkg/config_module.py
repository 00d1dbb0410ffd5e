"""
config_module.py
Logging helpers gated by SHTC_LOG and the YAML config parsing shared by the
verify, simulate and eigen commands.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import yaml

from errors_module import ConfigError
from eos_module import EosFamily, MixtureEos, PhaseEosSpec
from state_module import PrimitiveState, RelaxationParams

# --- Logging ---
LOG_ENV_VAR = "SHTC_LOG"
_LEVELS = {"debug": 10, "info": 20, "warning": 30, "error": 40, "quiet": 100}
DEFAULT_LEVEL = "info"


def _threshold() -> int:
    raw = (os.getenv(LOG_ENV_VAR) or DEFAULT_LEVEL).strip().lower()
    if raw not in _LEVELS:
        print(f"WARNING: [log] unknown {LOG_ENV_VAR}={raw!r}, using '{DEFAULT_LEVEL}'", file=sys.stderr)
        return _LEVELS[DEFAULT_LEVEL]
    return _LEVELS[raw]


def _emit(level: str, label: str, message: str) -> None:
    if _LEVELS[level] < _threshold():
        return
    stream = sys.stderr if _LEVELS[level] >= _LEVELS["warning"] else sys.stdout
    print(f"{level.upper()}: [{label}] {message}", file=stream)


def log_debug(label: str, message: str) -> None:
    _emit("debug", label, message)


def log_info(label: str, message: str) -> None:
    _emit("info", label, message)


def log_warning(label: str, message: str) -> None:
    _emit("warning", label, message)


def log_error(label: str, message: str) -> None:
    _emit("error", label, message)


# --- YAML loading ---

def load_yaml(path: str | Path) -> Dict[str, Any]:
    """Read a YAML mapping; any read/parse problem becomes a ConfigError."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"could not parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def section(data: Mapping[str, Any], key: str, required: bool = True) -> Dict[str, Any]:
    value = data.get(key)
    if value is None:
        if required:
            raise ConfigError(f"missing section '{key}'")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"section '{key}' must be a mapping")
    return value


def get_float(data: Mapping[str, Any], key: str, default: Optional[float] = None, where: str = "") -> float:
    if key not in data or data[key] is None:
        if default is None:
            raise ConfigError(f"missing key '{where}{key}'")
        return float(default)
    try:
        return float(data[key])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"'{where}{key}' must be a number, got {data[key]!r}") from e


def get_int(data: Mapping[str, Any], key: str, default: Optional[int] = None, where: str = "") -> int:
    if key not in data or data[key] is None:
        if default is None:
            raise ConfigError(f"missing key '{where}{key}'")
        return int(default)
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"'{where}{key}' must be an integer, got {value!r}")
    return int(value)


def get_bool(data: Mapping[str, Any], key: str, default: bool, where: str = "") -> bool:
    value = data.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"'{where}{key}' must be true/false, got {value!r}")
    return value


def get_range(data: Mapping[str, Any], key: str, default: Tuple[float, float], where: str = "") -> Tuple[float, float]:
    value = data.get(key, list(default))
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"'{where}{key}' must be a two-element list")
    try:
        lo, hi = float(value[0]), float(value[1])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"'{where}{key}' must contain numbers") from e
    if lo > hi:
        raise ConfigError(f"'{where}{key}' lower bound exceeds upper bound")
    return lo, hi


# --- Domain records from config mappings ---

def parse_phase(data: Mapping[str, Any], where: str) -> PhaseEosSpec:
    if not isinstance(data, dict):
        raise ConfigError(f"'{where}' must be a mapping")
    family_name = data.get("family")
    try:
        family = EosFamily(family_name)
    except ValueError as e:
        known = ", ".join(f.value for f in EosFamily)
        raise ConfigError(f"'{where}.family' must be one of {known}, got {family_name!r}") from e
    params = {k: get_float(data, k, where=f"{where}.") for k in ("K", "gamma", "cT2", "pInf", "phi0") if k in data}
    unknown = set(data) - {"family", "K", "gamma", "cT2", "pInf", "phi0"}
    if unknown:
        raise ConfigError(f"unknown keys in '{where}': {sorted(unknown)}")
    try:
        return PhaseEosSpec(family=family, **params)
    except ValueError as e:
        raise ConfigError(f"'{where}': {e}") from e


def parse_mixture(data: Mapping[str, Any]) -> MixtureEos:
    eos = section(data, "eos")
    return MixtureEos(parse_phase(eos.get("phase1"), "eos.phase1"), parse_phase(eos.get("phase2"), "eos.phase2"))


def parse_relax(data: Mapping[str, Any]) -> RelaxationParams:
    relax = section(data, "relax", required=False)
    try:
        return RelaxationParams(
            tau_alpha=get_float(relax, "tau_alpha", 1.0, "relax."),
            tau_c=get_float(relax, "tau_c", 1.0, "relax."),
            zeta=get_float(relax, "zeta", 1.0, "relax."),
            enable_alpha=get_bool(relax, "enable_alpha", True, "relax."),
            enable_c=get_bool(relax, "enable_c", False, "relax."),
            enable_w=get_bool(relax, "enable_w", True, "relax."),
        )
    except ValueError as e:
        raise ConfigError(f"relax: {e}") from e


def parse_state_values(text: str) -> Sequence[float]:
    """'a,c,rho,u,w' → five floats (used by the eigen command)."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5:
        raise ConfigError(f"state must be 'alpha,c,rho,u,w', got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as e:
        raise ConfigError(f"state must contain numbers: {text!r}") from e


def state_from_values(values: Sequence[float]) -> PrimitiveState:
    try:
        return PrimitiveState(*values)
    except ValueError as e:
        raise ConfigError(f"inadmissible state {list(values)}: {e}") from e
