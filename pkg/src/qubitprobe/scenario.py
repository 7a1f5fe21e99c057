"""Scenario files: YAML documents describing one run, chain, sweep or ion-trap mapping.

Example::

    scenario: single
    measurement:
      xi: 0.1
      axis: [1, 1, 1]        # or gamma/eta in radians
    output:
      trajectory_path: fig1b_trajectory.csv
      report_path: fig1b_report.json

See README.md for the full schema.
"""
from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .iontrap import IonTrapParams
from .linalg import ValidationError
from .model import EnvironmentConfig, MeasurementConfig, ProbeSelfConfig

SCENARIOS = ("single", "repeat", "sweep", "env", "iontrap")

SCHEMA: dict[str, Any] = {
    "scenario": None,
    "measurement": {
        "xi": None, "lambda": None, "gamma": None, "eta": None, "axis": None,
        "probe_axis": None, "readout_axis": None, "system_init": None, "probe_init": None,
    },
    "probe_self": {"delta_p": None, "axis": None, "counter_rotate": None},
    "environment": {"kappa_s": None, "kappa_p": None, "axis_s": None, "axis_p": None},
    "chain_length": None,
    "sweep": {"parameter": None, "values": None},
    "iontrap": {
        "j0": None, "delta1": None, "delta2": None, "theta": None, "phi": None,
        "delta_range_multiple": None, "simulate": None,
    },
    "integration": {"dt": None},
    "output": {"trajectory_path": None, "report_path": None, "sample_count": None},
}

SWEEPABLE = {
    "xi": ("measurement", "xi"),
    "lambda": ("measurement", "lambda"),
    "gamma": ("measurement", "gamma"),
    "eta": ("measurement", "eta"),
    "delta_p": ("probe_self", "delta_p"),
    "kappa_s": ("environment", "kappa_s"),
    "kappa_p": ("environment", "kappa_p"),
    "chain_length": ("chain_length",),
}

NAMED_STATES = {
    "0": [1, 0],
    "1": [0, 1],
    "+": [2 ** -0.5, 2 ** -0.5],
    "-": [2 ** -0.5, -(2 ** -0.5)],
    "+i": [2 ** -0.5, 1j * 2 ** -0.5],
    "-i": [2 ** -0.5, -1j * 2 ** -0.5],
}


class ConfigError(ValueError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None,
                 source: str | None = None):
        self.field = field
        self.line = line
        self.source = source
        self.message = message
        super().__init__(self.describe())

    def describe(self) -> str:
        where = self.source or "<config>"
        if self.line is not None:
            where += f":{self.line}"
        if self.field:
            return f"{where}: field '{self.field}': {self.message}"
        return f"{where}: {self.message}"


def _line_map(text: str) -> dict[str, int]:
    lines: dict[str, int] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = f"{prefix}.{k.value}" if prefix else str(k.value)
                lines[path] = k.start_mark.line + 1
                walk(v, path)

    walk(yaml.compose(text), "")
    return lines


def _check_keys(data, schema, prefix, err):
    if not isinstance(data, dict):
        raise err("expected a mapping", prefix or None)
    for k, v in data.items():
        path = f"{prefix}.{k}" if prefix else str(k)
        if k not in schema:
            raise err("unknown field", path)
        if isinstance(schema[k], dict) and v is not None:
            _check_keys(v, schema[k], path, err)


@dataclass
class ScenarioFile:
    scenario: str
    data: dict
    source: str = "<config>"
    lines: dict = field(default_factory=dict)

    def error(self, message, field=None) -> ConfigError:
        line = None
        if field is not None:
            parts = field.split(".")
            while parts and line is None:
                line = self.lines.get(".".join(parts))
                parts.pop()
        return ConfigError(message, field, line, self.source)

    def section(self, name) -> dict | None:
        return self.data.get(name)

    # builders -------------------------------------------------------------

    def _num(self, sect, key, default=None, *, required=False):
        d = self.data.get(sect) or {}
        if key not in d or d[key] is None:
            if required:
                raise self.error("is required", f"{sect}.{key}")
            return default
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.error(f"expected a number, got {v!r}", f"{sect}.{key}")
        return float(v)

    def _vec(self, sect, key, default=None):
        d = self.data.get(sect) or {}
        v = d.get(key)
        if v is None:
            return default
        if (not isinstance(v, list) or len(v) != 3
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
            raise self.error(f"expected a list of 3 numbers, got {v!r}", f"{sect}.{key}")
        a = np.array(v, dtype=float)
        if np.linalg.norm(a) < 1e-6:
            raise self.error("axis vector has near-zero length", f"{sect}.{key}")
        return a

    def _state(self, sect, key):
        d = self.data.get(sect) or {}
        v = d.get(key)
        if v is None:
            return None
        if isinstance(v, (str, int)) and not isinstance(v, bool) and str(v) in NAMED_STATES:
            return np.array(NAMED_STATES[str(v)], dtype=complex)
        if isinstance(v, list) and len(v) == 2:
            try:
                return np.array([complex(str(x).replace(" ", "")) for x in v], dtype=complex)
            except ValueError:
                pass
        raise self.error(
            f"expected one of {sorted(NAMED_STATES)} or two amplitudes, got {v!r}", f"{sect}.{key}"
        )

    def measurement(self) -> MeasurementConfig:
        if self.section("measurement") is None:
            raise self.error("section is required", "measurement")
        xi = self._num("measurement", "xi", required=True)
        kw: dict[str, Any] = {}
        lam = self._num("measurement", "lambda")
        if lam is not None:
            kw["lam"] = lam
        for key, name in (("probe_axis", "probe_axis"), ("readout_axis", "readout_axis")):
            v = self._vec("measurement", key)
            if v is not None:
                kw[name] = v
        for key in ("system_init", "probe_init"):
            v = self._state("measurement", key)
            if v is not None:
                kw[key] = v
        axis = self._vec("measurement", "axis")
        gamma = self._num("measurement", "gamma")
        eta = self._num("measurement", "eta")
        try:
            if axis is not None:
                if gamma is not None or eta is not None:
                    raise self.error("give either axis or gamma/eta, not both", "measurement.axis")
                return MeasurementConfig.from_axis(xi, axis, **kw)
            return MeasurementConfig(xi=xi, gamma=gamma or 0.0, eta=eta or 0.0, **kw)
        except ValidationError as exc:
            raise self.error(str(exc), _guess_field(str(exc), "measurement")) from None

    def probe_self(self) -> ProbeSelfConfig | None:
        if self.section("probe_self") is None:
            return None
        dp = self._num("probe_self", "delta_p", required=True)
        axis = self._vec("probe_self", "axis", default=np.array([0.0, 1.0, 0.0]))
        try:
            return ProbeSelfConfig(delta_p=dp, axis=axis)
        except ValidationError as exc:
            raise self.error(str(exc), "probe_self.delta_p") from None

    def counter_rotate(self) -> bool:
        return bool((self.section("probe_self") or {}).get("counter_rotate", False))

    def environment(self) -> EnvironmentConfig | None:
        if self.section("environment") is None:
            return None
        kw = {
            "kappa_s": self._num("environment", "kappa_s", 0.0),
            "kappa_p": self._num("environment", "kappa_p", 0.0),
        }
        for key in ("axis_s", "axis_p"):
            v = self._vec("environment", key)
            if v is not None:
                kw[key] = v
        try:
            return EnvironmentConfig(**kw)
        except ValidationError as exc:
            raise self.error(str(exc), _guess_field(str(exc), "environment")) from None

    def chain_length(self) -> int | None:
        n = self.data.get("chain_length")
        if n is None:
            return None
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise self.error(f"expected a positive integer, got {n!r}", "chain_length")
        return n

    def iontrap(self) -> IonTrapParams:
        if self.section("iontrap") is None:
            raise self.error("section is required", "iontrap")
        kw = {"j0": self._num("iontrap", "j0", required=True),
              "delta1": self._num("iontrap", "delta1", required=True)}
        for key in ("delta2", "theta", "phi", "delta_range_multiple"):
            v = self._num("iontrap", key)
            if v is not None:
                kw[key] = v
        return IonTrapParams(**kw)

    def simulate_iontrap(self) -> bool:
        return bool((self.section("iontrap") or {}).get("simulate", False))

    def dt(self) -> float | None:
        dt = self._num("integration", "dt")
        if dt is not None and dt <= 0:
            raise self.error("must be positive", "integration.dt")
        return dt

    def sample_count(self) -> int | None:
        n = (self.section("output") or {}).get("sample_count")
        if n is None:
            return None
        if isinstance(n, bool) or not isinstance(n, int) or n < 2:
            raise self.error(f"expected an integer >= 2, got {n!r}", "output.sample_count")
        return n

    def output_path(self, key: str, default: str) -> str:
        v = (self.section("output") or {}).get(key)
        if v is None:
            return default
        if not isinstance(v, str) or not v:
            raise self.error("expected a file path", f"output.{key}")
        return v

    def sweep(self) -> tuple[str, list]:
        sw = self.section("sweep")
        if sw is None:
            raise self.error("section is required", "sweep")
        name = sw.get("parameter")
        if not isinstance(name, str):
            raise self.error("expected a parameter name", "sweep.parameter")
        short = name.split(".")[-1]
        if short not in SWEEPABLE or (("." in name) and tuple(name.split(".")) != SWEEPABLE[short]):
            raise self.error(f"unknown parameter {name!r}; choose from {sorted(SWEEPABLE)}",
                             "sweep.parameter")
        values = sw.get("values")
        if not isinstance(values, list) or not values:
            raise self.error("expected a non-empty list", "sweep.values")
        return short, values

    def with_value(self, param: str, value) -> "ScenarioFile":
        data = copy.deepcopy(self.data)
        data.pop("sweep", None)
        path = SWEEPABLE[param]
        if len(path) == 1:
            data[path[0]] = value
        else:
            data.setdefault(path[0], {})
            if data[path[0]] is None:
                data[path[0]] = {}
            data[path[0]][path[1]] = value
        return ScenarioFile("single", data, self.source, self.lines)


def _guess_field(message: str, section: str) -> str:
    for key in sorted(SCHEMA[section], key=len, reverse=True):
        if re.search(rf"\b{key}\b", message):
            return f"{section}.{key}"
    return section


def parse_scenario(text: str, source: str = "<config>", scenario: str | None = None) -> ScenarioFile:
    def err(msg, fld=None, line=None):
        return ConfigError(msg, fld, line, source)

    try:
        data = yaml.safe_load(text)
        lines = _line_map(text) if data else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise err(f"YAML syntax error: {problem}", None, line) from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise err("top level must be a mapping")

    def keyed_err(msg, fld=None):
        return ConfigError(msg, fld, lines.get(fld) if fld else None, source)

    _check_keys(data, SCHEMA, "", keyed_err)
    declared = data.get("scenario")
    if declared is not None and declared not in SCENARIOS:
        raise keyed_err(f"must be one of {SCENARIOS}, got {declared!r}", "scenario")
    if scenario is not None and declared is not None and declared != scenario:
        raise keyed_err(f"file declares {declared!r} but command is {scenario!r}", "scenario")
    chosen = scenario or declared
    if chosen is None:
        raise keyed_err("no scenario given", "scenario")
    return ScenarioFile(chosen, data, source, lines)


def load_scenario(path: str | Path, scenario: str | None = None) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", None, None, str(path)) from None
    return parse_scenario(text, str(path), scenario)
