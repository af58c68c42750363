"""Run configuration: defaults, config-file parsing and validation.

The config file is standard INI (line-oriented ``key = value`` under
``[section]`` headers), one section per subcommand plus ``[common]``.
Every key has a default; unknown sections or keys are rejected rather than
ignored, and each value is type-checked and range-checked against the schema
below. Command-line flags override file values, and the fully resolved
configuration is persisted in the run metadata.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .errors import DomainError

OUTPUT_DIR_ENV = "VISCARL_OUTPUT_DIR"


def _positive(x):
    return x > 0 and math.isfinite(x)


def _nonneg(x):
    return x >= 0 and math.isfinite(x)


def _finite(x):
    return math.isfinite(x)


@dataclass(frozen=True)
class Key:
    name: str
    type: type
    default: Any
    check: Optional[Callable[[Any], bool]] = None
    choices: Optional[tuple] = None


_PHYS_KEYS = [
    Key("kappa_c", float, 2 * math.pi * 22e3, _positive),
    Key("gamma_f", float, 9 * 2 * math.pi * 22e3, _positive),
    Key("temperature", float, 150e-6, _positive),
    Key("atom_mass", float, 1.44316060e-25, _positive),
    Key("wavenumber", float, 2 * math.pi / 780.241e-9, _positive),
    Key("atom_count", float, 1e6, _positive),
    Key("momentum_spread_prefactor", float, 2.0, _positive),
]

SCHEMA: dict[str, list[Key]] = {
    "common": [
        Key("output_dir", str, "runs"),
        Key("seed", int, 20231, _nonneg),
    ],
    "stability": [
        Key("kappa", float, 0.1, _positive),
        Key("D", float, 2.1, _nonneg),
    ],
    "threshold": [
        Key("kappa", float, 0.1, _positive),
    ],
    "simulate-fp": [
        Key("kappa", float, 0.075, _positive),
        Key("D", float, 1.49, _nonneg),
        Key("a0", float, 1e-5, _finite),
        Key("n_max", int, 32, lambda v: v >= 2),
        Key("dt", float, 0.01, _positive),
        Key("t_end", float, 250.0, _positive),
        Key("sample_dtau", float, 0.1, _positive),
    ],
    "simulate-sde": [
        Key("mode", str, "overdamped", choices=("overdamped", "full")),
        Key("kappa", float, 0.075, _positive),
        Key("D", float, 1.49, _nonneg),
        Key("gamma_bar", float, 100.0, _positive),
        Key("n_sim", int, 10000, lambda v: v >= 1),
        Key("a0", float, 1e-5, _finite),
        Key("dtau", float, 0.0025, _positive),
        Key("t_end", float, 100.0, _positive),
        Key("sample_dtau", float, 0.25, _positive),
        Key("stratified_phases", bool, False),
    ],
    "steady": [
        Key("kappa", float, 0.075, _positive),
        Key("D", float, 1.49, _positive),
    ],
    "sweep-d": [
        Key("kappa", float, 0.1, _positive),
        Key("d_min", float, 0.05, _positive),
        Key("d_max", float, 2.2, _positive),
        Key("n_points", int, 44, lambda v: v >= 2),
    ],
    "ramp": _PHYS_KEYS + [
        Key("ratio_min", float, 0.2, _positive),
        Key("ratio_max", float, 5.0, _positive),
        Key("n_points", int, 49, lambda v: v >= 2),
    ],
    "verify-scaling": _PHYS_KEYS + [
        Key("sweep", str, "temperature",
            choices=("temperature", "kappa_c", "gamma_f", "atom_count")),
        Key("regime", str, "good", choices=("good", "bad")),
        Key("observable", str, "pump", choices=("pump", "shift")),
        Key("n_points", int, 9, lambda v: v >= 3),
        Key("decades", float, 1.0, lambda v: v >= 1.0),
    ],
    "fig1": [
        Key("n_kappa", int, 120, lambda v: v >= 2),
        Key("n_d", int, 120, lambda v: v >= 2),
        Key("kappa_min", float, 0.05, _positive),
        Key("kappa_max", float, 5.0, _positive),
        Key("d_min", float, 0.05, _positive),
        Key("d_max", float, 5.0, _positive),
    ],
    "fig2": [
        Key("kappa", float, 0.075, _positive),
        Key("D", float, 1.49, _positive),
        Key("a0", float, 1e-5, _positive),
        Key("t_end", float, 250.0, _positive),
        Key("n_max", int, 32, lambda v: v >= 2),
    ],
    "fig3": [
        Key("kappa", float, 0.1, _positive),
        Key("d_min", float, 0.05, _positive),
        Key("d_max", float, 2.2, _positive),
        Key("n_points", int, 87, lambda v: v >= 2),
    ],
    "fig4": _PHYS_KEYS + [
        Key("ratio_min", float, 0.2, _positive),
        Key("ratio_max", float, 5.0, _positive),
        Key("n_points", int, 49, lambda v: v >= 2),
    ],
}


def defaults(section: str) -> dict[str, Any]:
    """Fully defaulted configuration for one subcommand plus [common]."""
    if section not in SCHEMA:
        raise DomainError(f"unknown config section {section!r}")
    cfg = {k.name: k.default for k in SCHEMA["common"]}
    cfg.update({k.name: k.default for k in SCHEMA[section]})
    return cfg


def _coerce(key: Key, raw: str, where: str):
    try:
        if key.type is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return key.type(raw)
    except ValueError as exc:
        raise DomainError(
            f"{where}: value {raw!r} for key {key.name!r} is not a valid "
            f"{key.type.__name__}") from exc


def validate_value(key: Key, value, where: str):
    if key.choices is not None and value not in key.choices:
        raise DomainError(f"{where}: key {key.name!r} must be one of "
                          f"{key.choices}, got {value!r}")
    if key.check is not None and not key.check(value):
        raise DomainError(f"{where}: value {value!r} for key {key.name!r} "
                          f"is out of range")
    return value


def parse_config(path: str, section: str) -> dict[str, Any]:
    """Read a config file and return the resolved configuration for `section`.

    Only the [common] section and the section matching the subcommand are
    consulted; any other section present in the file must still be a known
    subcommand name. Unknown keys raise with the key and section named.
    """
    cfg = defaults(section)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str    # keys are case-sensitive ("D" stays "D")
    with open(path) as fh:
        parser.read_file(fh)
    known = {k.name: k for k in SCHEMA["common"]} | {k.name: k for k in SCHEMA[section]}
    for sect in parser.sections():
        if sect not in SCHEMA:
            raise DomainError(f"{path}: unknown section [{sect}]")
        if sect not in ("common", section):
            continue
        keys = {k.name: k for k in SCHEMA[sect]}
        for name, raw in parser.items(sect):
            if name not in keys:
                raise DomainError(f"{path} [{sect}]: unknown key {name!r}")
            key = known[name]
            cfg[name] = validate_value(key, _coerce(key, raw, f"{path} [{sect}]"),
                                       f"{path} [{sect}]")
    return cfg


def apply_overrides(cfg: dict[str, Any], section: str,
                    overrides: dict[str, Any]) -> dict[str, Any]:
    """Overlay non-None flag values on a resolved config, with validation."""
    known = {k.name: k for k in SCHEMA["common"]} | {k.name: k for k in SCHEMA[section]}
    out = dict(cfg)
    for name, value in overrides.items():
        if value is None:
            continue
        if name not in known:
            raise DomainError(f"unknown option {name!r} for subcommand {section!r}")
        out[name] = validate_value(known[name], value, f"--{name.replace('_', '-')}")
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir and overrides.get("output_dir") is None:
        out["output_dir"] = env_dir
    return out
