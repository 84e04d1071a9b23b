"""Experiment config files: strict parsing and a faithful round trip.

Configs are JSON with camelCase keys.  Top level:

    {
      "space":      {"dH": 4, "J": 6, "T": 1.0, "nScheduled": 64},
      "covariance": {"eigenvalues": [...] | {"kind": ..., ...},
                     "basis": "identity" | {"seed": n} | [[...]],
                     "tailMass": 0.0},
      "drivers":    "brownian" | [entry, ...] | {"replay": ...},
      "integrand":  {"family": ..., "carrier": ..., "evaluator": ...,
                     "seed": n, "scale": x, "value": ...,
                     "breakpoints": [...]},
      "nPaths": 100000, "nExact": 64, "seed": n,
      "checks": ["isometry1", ...], "fault": null
    }

Every section is optional and falls back to the desk-scale defaults of
:class:`levyint.scenarios.ScenarioConfig`.  Unknown keys are rejected by
name rather than ignored, so a typo cannot silently run the defaults.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .checks import BASE_SEED, CHECKS
from .errors import ConfigInvalid, ConfigNotFound
from .scenarios import (FAULTS, CovarianceConfig, IntegrandConfig,
                        ScenarioConfig)

_TOP_KEYS = {"space", "covariance", "drivers", "integrand", "nPaths",
             "nExact", "seed", "checks", "fault"}
_SPACE_KEYS = {"dH", "J", "T", "nScheduled"}
_COV_KEYS = {"eigenvalues", "basis", "tailMass"}
_LAW_KEYS = {"kind", "c", "p", "r"}
_INTEGRAND_KEYS = {"family", "carrier", "evaluator", "seed", "scale",
                   "value", "breakpoints"}


@dataclass(frozen=True)
class ExperimentConfig:
    """A scenario plus the run-level knobs shared by every subcommand."""

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    n_paths: int = 100_000
    n_exact: int = 64
    seed: int = BASE_SEED
    checks: Optional[tuple] = None


def _reject_unknown(section: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigInvalid(f"unknown key(s) {', '.join(unknown)} in {where}")


def _positive_int(section: dict, key: str, default: int, where: str) -> int:
    value = section.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise ConfigInvalid(f"{where}.{key} must be a positive integer")
    return value


def _parse_space(section: dict) -> dict:
    _reject_unknown(section, _SPACE_KEYS, "space")
    horizon = section.get("T", 1.0)
    if not isinstance(horizon, (int, float)) or isinstance(horizon, bool) \
            or horizon <= 0:
        raise ConfigInvalid("space.T must be a positive number")
    return {
        "dim_h": _positive_int(section, "dH", 4, "space"),
        "n_modes": _positive_int(section, "J", 6, "space"),
        "horizon": float(horizon),
        "n_scheduled": _positive_int(section, "nScheduled", 64, "space"),
    }


def _parse_covariance(section: dict) -> CovarianceConfig:
    _reject_unknown(section, _COV_KEYS, "covariance")
    ev = section.get("eigenvalues", {"kind": "geometric", "c": 0.5, "r": 0.5})
    if isinstance(ev, dict):
        _reject_unknown(ev, _LAW_KEYS, "covariance.eigenvalues")
    elif isinstance(ev, (list, tuple)):
        ev = tuple(float(x) for x in ev)
    else:
        raise ConfigInvalid("covariance.eigenvalues must be a list or a law")
    basis = section.get("basis", "identity")
    if isinstance(basis, dict):
        _reject_unknown(basis, {"seed"}, "covariance.basis")
    elif isinstance(basis, list):
        basis = tuple(tuple(float(x) for x in row) for row in basis)
    elif basis != "identity":
        raise ConfigInvalid(
            'covariance.basis must be "identity", {"seed": n} or a matrix')
    tail = section.get("tailMass")
    if tail is not None:
        tail = float(tail)
        if tail < 0:
            raise ConfigInvalid("covariance.tailMass must be nonnegative")
    return CovarianceConfig(ev, basis, tail)


def _parse_integrand(section: dict) -> IntegrandConfig:
    _reject_unknown(section, _INTEGRAND_KEYS, "integrand")
    value = section.get("value")
    breakpoints = section.get("breakpoints")
    if breakpoints is not None:
        breakpoints = tuple(float(x) for x in breakpoints)
    return IntegrandConfig(
        family=section.get("family", "grid"),
        carrier=section.get("carrier", "operator"),
        evaluator=section.get("evaluator", "driver_linear"),
        seed=int(section.get("seed", 0)),
        scale=float(section.get("scale", 1.0)),
        value=value,
        breakpoints=breakpoints,
    )


def _parse_drivers(entry):
    if isinstance(entry, str):
        return entry
    if isinstance(entry, dict):
        if "replay" not in entry:
            raise ConfigInvalid(
                "a drivers mapping must be a replay: {\"replay\": ...}")
        _reject_unknown(entry, {"replay"}, "drivers")
        return {"replay": entry["replay"]}
    if isinstance(entry, (list, tuple)):
        return tuple(e if isinstance(e, str) else dict(e) for e in entry)
    raise ConfigInvalid("drivers must be a name, a recipe list or a replay")


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigInvalid("config root must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "config")
    space = _parse_space(data.get("space", {}))
    scenario_kwargs = dict(space)
    if "covariance" in data:
        scenario_kwargs["covariance"] = _parse_covariance(data["covariance"])
    if "drivers" in data:
        scenario_kwargs["drivers"] = _parse_drivers(data["drivers"])
    if "integrand" in data:
        scenario_kwargs["integrand"] = _parse_integrand(data["integrand"])
    fault = data.get("fault")
    if fault is not None and fault not in FAULTS:
        raise ConfigInvalid(f"fault {fault!r} not one of {', '.join(FAULTS)}")
    scenario_kwargs["fault"] = fault
    checks = data.get("checks")
    if checks is not None:
        checks = tuple(checks)
        unknown = sorted(set(checks) - set(CHECKS))
        if unknown:
            raise ConfigInvalid(
                f"unknown check(s) {', '.join(unknown)}; valid names: "
                f"{', '.join(CHECKS)}")
    seed = data.get("seed", BASE_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigInvalid("seed must be a nonnegative integer")
    return ExperimentConfig(
        scenario=ScenarioConfig(**scenario_kwargs),
        n_paths=_positive_int(data, "nPaths", 100_000, "config"),
        n_exact=_positive_int(data, "nExact", 64, "config"),
        seed=seed,
        checks=checks,
    )


def load_config(path: str) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigNotFound(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config file {path} is not valid JSON: {exc}")
    return parse_config(data)


def _listify(value):
    if isinstance(value, tuple):
        return [_listify(v) for v in value]
    return value


def config_to_dict(cfg: ExperimentConfig) -> dict:
    sc = cfg.scenario
    cov = sc.covariance
    out = {
        "space": {"dH": sc.dim_h, "J": sc.n_modes, "T": sc.horizon,
                  "nScheduled": sc.n_scheduled},
        "covariance": {"eigenvalues": _listify(cov.eigenvalues),
                       "basis": _listify(cov.basis)},
        "drivers": _listify(sc.drivers),
        "integrand": {"family": sc.integrand.family,
                      "carrier": sc.integrand.carrier,
                      "evaluator": sc.integrand.evaluator,
                      "seed": sc.integrand.seed,
                      "scale": sc.integrand.scale},
        "nPaths": cfg.n_paths,
        "nExact": cfg.n_exact,
        "seed": cfg.seed,
    }
    if cov.tail_mass is not None:
        out["covariance"]["tailMass"] = cov.tail_mass
    if sc.integrand.value is not None:
        out["integrand"]["value"] = _listify(sc.integrand.value)
    if sc.integrand.breakpoints is not None:
        out["integrand"]["breakpoints"] = _listify(sc.integrand.breakpoints)
    if sc.fault is not None:
        out["fault"] = sc.fault
    if cfg.checks is not None:
        out["checks"] = list(cfg.checks)
    return out


def save_config(cfg: ExperimentConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2)
        fh.write("\n")
