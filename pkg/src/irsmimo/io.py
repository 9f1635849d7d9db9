"""Scenario config files and report persistence.

A config file is a YAML mapping of :class:`ScenarioConfig` field names to
values. Numbers may carry a unit suffix that must match the field:
``dB`` for Ricean factors and shadowing deviations, ``dBm`` for powers,
``m`` for distances. ``inf`` is accepted for Ricean factors (pure LOS)::

    n_t: 64
    n_r: 36
    n: 100
    k: 3
    eta_db: -5 dB
    d_1: 2 m
    power_dbm: 30 dBm

``n_t``, ``n_r``, ``n`` and ``k`` are required; every other field defaults
to the baseline scenario. A ``summary.json`` written by :func:`emit_report`
is also accepted and yields its embedded resolved config.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import json
import math
import re
from pathlib import Path

import yaml

from .montecarlo import RateReport
from .scenario import ConfigError, ScenarioConfig

__all__ = ["load_config", "parse_config", "parse_overrides", "emit_report", "config_to_dict",
           "REQUIRED_FIELDS"]

REQUIRED_FIELDS = ("n_t", "n_r", "n", "k")

_UNITS = {
    "eta_db": "dB", "eta_ti_db": "dB", "eta_ir_db": "dB",
    "sigma_0": "dB", "sigma_1": "dB", "sigma_2": "dB",
    "power_dbm": "dBm", "noise_dbm": "dBm",
    "d_tr": "m", "d_v": "m", "d_1": "m",
}
_NUMBER_WITH_UNIT = re.compile(r"^\s*([-+]?(?:inf|[0-9.]+(?:[eE][-+]?\d+)?))\s*([A-Za-z]*)\s*$")
_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_INT_FIELDS = {"n_t", "n_r", "n", "k", "l_direct", "l_ti", "l_ir", "trials", "seed", "draws"}
_STR_FIELDS = {"phase_policy", "power_policy", "shadowing_mode"}


def _key_lines(text: str) -> dict[str, int]:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if hasattr(k, "value")}


def _coerce(name: str, value, where: str):
    """Convert one raw value to the field's type, stripping a unit suffix."""
    if name in _STR_FIELDS:
        if not isinstance(value, str):
            raise ConfigError(f"{name}{where}: expected a string, got {value!r}")
        return value
    if name == "include_direct":
        if not isinstance(value, bool):
            raise ConfigError(f"{name}{where}: expected true/false, got {value!r}")
        return value
    if name == "n_streams" and value is None:
        return None
    if isinstance(value, bool):
        raise ConfigError(f"{name}{where}: expected a number, got {value!r}")
    if isinstance(value, str):
        match = _NUMBER_WITH_UNIT.match(value)
        if not match:
            raise ConfigError(f"{name}{where}: cannot parse {value!r} as a number")
        number, unit = match.groups()
        expected = _UNITS.get(name)
        if unit and unit != expected:
            raise ConfigError(f"{name}{where}: unit {unit!r} not valid here"
                              + (f" (expected {expected!r})" if expected else ""))
        value = float(number)
    if name in _INT_FIELDS or name == "n_streams":
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{name}{where}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError(f"{name}{where}: expected a number, got {value!r}")
    return float(value)


def parse_config(data: dict, lines: dict[str, int] | None = None,
                 require: tuple[str, ...] = REQUIRED_FIELDS) -> ScenarioConfig:
    """Build a validated config from a raw mapping, collecting every problem."""
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping of field names to values")
    lines = lines or {}
    problems = []
    for key in data:
        if key not in _FIELDS:
            problems.append(f"{key} (line {lines[key]}): unknown field" if key in lines
                            else f"{key}: unknown field")
    for key in require:
        if key not in data:
            problems.append(f"{key}: required field missing")
    values = {}
    for key, raw in data.items():
        if key not in _FIELDS:
            continue
        where = f" (line {lines[key]})" if key in lines else ""
        try:
            values[key] = _coerce(key, raw, where)
        except ConfigError as exc:
            problems.extend(exc.problems)
    if problems:
        raise ConfigError(problems)
    config = ScenarioConfig(**values)
    problems = config.problems()
    if problems:
        raise ConfigError(problems)
    return config


def load_config(path) -> ScenarioConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ConfigError(f"{path}: parse error at line {mark.line + 1}, column {mark.column + 1}: "
                          f"{exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from exc
    if data is None:
        data = {}
    if isinstance(data, dict) and isinstance(data.get("config"), dict) and "aggregates" in data:
        return parse_config(data["config"])
    return parse_config(data, _key_lines(text))


def config_to_dict(config: ScenarioConfig) -> dict:
    out = {}
    for key, value in config.to_dict().items():
        if isinstance(value, float) and math.isinf(value):
            value = "inf" if value > 0 else "-inf"
        out[key] = value
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report: RateReport, out_dir, timestamp: bool = True) -> tuple[Path, Path]:
    """Write ``results.csv`` (one row per trial) and ``summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / "results.csv", out / "summary.json"
    rows = [t.row() for t in report.trials]
    header = list(rows[0]) if rows else ["trial"]
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[h]) for h in header])
    summary = report.summary()
    summary["config"] = config_to_dict(report.config)
    if timestamp:
        summary["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def parse_overrides(items, extra_ints: tuple[str, ...] = ("draws",)) -> dict:
    """Turn ``["key=value", ...]`` into typed config overrides."""
    out, problems = {}, []
    for item in items or ():
        key, sep, text = item.partition("=")
        key = key.strip()
        if not sep:
            problems.append(f"{item!r}: expected key=value")
            continue
        raw = yaml.safe_load(text) if text.strip() else None
        try:
            if key in _FIELDS or key in extra_ints:
                out[key] = _coerce(key, raw, "")
            else:
                problems.append(f"{key}: unknown field")
        except ConfigError as exc:
            problems.extend(exc.problems)
    if problems:
        raise ConfigError(problems)
    return out
