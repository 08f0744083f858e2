"""Experiment configuration files.

A config file is a flat TOML document; every key is optional and missing
keys fall back to the reference scenario. Powers are given in dBm and
converted to linear milliwatts, the amplification ``eta_db`` is a power gain
in dB (amplitude ``10**(eta_db/20)``). Recognized keys::

    M, N, L                    int
    eta_db                     float, dB
    pt_dbm, pris_max_dbm       float, dBm
    sigma2_dbm, nu2_dbm        float, dBm
    max_iter, conv_tol         int, float
    bs_position, ris_position  [x, y, z] in meters
    ue_corner                  [x, y, z] in meters
    ue_extent                  [dx, dy] in meters
    rho_bu, rho_br, rho_ru     float, linear Rician factors
    pathloss_intercept_db      float
    pathloss_exponent_coeff_db float
    sweep                      "rho" | "eta_db" | "L"
    values                     list of numbers, strictly increasing
    trials, seed               int
    methods                    list of method names
    tie_rho_links              bool
    arbitrary_placements       int
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channels import FadingSpec, Geometry
from .design import SystemConfig
from .sweep import SWEEP_VARIABLES, SweepSpec, apply_sweep_value

__all__ = ["ConfigError", "ExperimentConfig", "db_to_linear", "dbm_to_mw", "load_config", "parse_config"]


class ConfigError(ValueError):
    pass


# bare power names that must carry an explicit unit suffix
_UNIT_HINTS = {
    "eta": "eta_db", "eta_linear": "eta_db",
    "pt": "pt_dbm", "p_t": "pt_dbm", "pt_db": "pt_dbm", "pt_w": "pt_dbm", "pt_mw": "pt_dbm",
    "pris_max": "pris_max_dbm", "p_ris_max": "pris_max_dbm", "pris_max_db": "pris_max_dbm",
    "sigma2": "sigma2_dbm", "sigma2_db": "sigma2_dbm", "sigma2_w": "sigma2_dbm",
    "nu2": "nu2_dbm", "nu2_db": "nu2_dbm", "nu2_w": "nu2_dbm",
}

DEFAULTS: dict[str, Any] = {
    "M": 8,
    "N": 100,
    "L": 20,
    "eta_db": 10.0,
    "pt_dbm": 10.0,
    "pris_max_dbm": 0.0,
    "sigma2_dbm": -80.0,
    "nu2_dbm": -80.0,
    "max_iter": 50,
    "conv_tol": 1e-8,
    "bs_position": [0.0, 0.0, 0.0],
    "ris_position": [20.0, 13.0, 3.0],
    "ue_corner": [18.0, 8.0, 0.0],
    "ue_extent": [3.0, 10.0],
    "rho_bu": 10.0,
    "rho_br": 10.0,
    "rho_ru": 0.0,
    "pathloss_intercept_db": 30.0,
    "pathloss_exponent_coeff_db": 22.0,
    "sweep": "L",
    "values": None,
    "trials": 100,
    "seed": 0,
    "methods": ["proposed", "arbitrary", "passive", "active", "no_ris"],
    "tie_rho_links": True,
    "arbitrary_placements": 10,
}

# sweep grid used when ``values`` is not given
DEFAULT_VALUES = {
    "L": [20, 40, 60, 80],
    "eta_db": [0.0, 5.0, 10.0, 15.0, 20.0],
    "rho": [0.0, 1.0, 10.0, 100.0],
}

_INT_KEYS = {"M", "N", "L", "max_iter", "trials", "seed", "arbitrary_placements"}
_VEC_KEYS = {"bs_position": 3, "ris_position": 3, "ue_corner": 3, "ue_extent": 2}


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig
    geometry: Geometry
    fading: FadingSpec
    sweep: SweepSpec

    def __iter__(self):
        return iter((self.system, self.geometry, self.fading, self.sweep))


def _check_types(raw: Mapping[str, Any]) -> dict[str, Any]:
    out = {}
    for key, val in raw.items():
        if key not in DEFAULTS:
            if key.lower() in _UNIT_HINTS:
                raise ConfigError(f"{key}: unit not specified, use {_UNIT_HINTS[key.lower()]!r}")
            raise ConfigError(f"{key}: unknown configuration key")
        if key in _INT_KEYS:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{key}: expected an integer, got {val!r}")
        elif key in _VEC_KEYS:
            if not isinstance(val, list) or len(val) != _VEC_KEYS[key] or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in val
            ):
                raise ConfigError(f"{key}: expected a list of {_VEC_KEYS[key]} numbers, got {val!r}")
        elif key == "sweep":
            if val not in SWEEP_VARIABLES:
                raise ConfigError(f"sweep: expected one of {SWEEP_VARIABLES}, got {val!r}")
        elif key == "values":
            if not isinstance(val, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in val):
                raise ConfigError(f"values: expected a list of numbers, got {val!r}")
        elif key == "methods":
            if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
                raise ConfigError(f"methods: expected a list of names, got {val!r}")
        elif key == "tie_rho_links":
            if not isinstance(val, bool):
                raise ConfigError(f"tie_rho_links: expected true/false, got {val!r}")
        else:
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
                raise ConfigError(f"{key}: expected a finite number, got {val!r}")
        out[key] = val
    return out


def parse_config(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a key/value mapping and convert it to linear-scale objects."""
    v = {**DEFAULTS, **_check_types(raw)}
    if v["values"] is None:
        v["values"] = DEFAULT_VALUES[v["sweep"]]
    try:
        system = SystemConfig(
            M=v["M"],
            N=v["N"],
            L=v["L"],
            eta=10.0 ** (v["eta_db"] / 20.0),
            P_t=dbm_to_mw(v["pt_dbm"]),
            P_ris_max=dbm_to_mw(v["pris_max_dbm"]),
            sigma2=dbm_to_mw(v["sigma2_dbm"]),
            nu2=dbm_to_mw(v["nu2_dbm"]),
            max_iter=v["max_iter"],
            conv_tol=float(v["conv_tol"]),
        )
        geometry = Geometry(
            bs_position=v["bs_position"],
            ris_position=v["ris_position"],
            ue_region_corner=v["ue_corner"],
            ue_region_extent=v["ue_extent"],
        )
        fading = FadingSpec(
            rho_bu=float(v["rho_bu"]),
            rho_br=float(v["rho_br"]),
            rho_ru=float(v["rho_ru"]),
            pathloss_intercept_db=float(v["pathloss_intercept_db"]),
            pathloss_exponent_coeff_db=float(v["pathloss_exponent_coeff_db"]),
        )
        sweep = SweepSpec(
            variable=v["sweep"],
            values=tuple(v["values"]),
            trials=v["trials"],
            root_seed=v["seed"],
            methods=tuple(v["methods"]),
            tie_rho_links=v["tie_rho_links"],
            arbitrary_placements=v["arbitrary_placements"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    bundle = ExperimentConfig(system, geometry, fading, sweep)
    for value in sweep.values if "values" in raw else ():
        try:
            apply_sweep_value(bundle, value)
        except ValueError as exc:
            raise ConfigError(f"values: {value!r} is not valid for sweep {sweep.variable!r}: {exc}") from exc
    return bundle


def load_config(path) -> ExperimentConfig:
    """Read and validate a TOML config file (an empty file gives the reference scenario)."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: no such file") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(raw)
