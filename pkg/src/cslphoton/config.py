"""Scenario configuration files.

Format::

    # comment
    [laser-loss]
    lambda0_nm = 1053
    sigma_cm   = 0.01      # trailing comments are allowed
    n0         = 2.5e21

One ``[kind]`` header, then ``key = value`` lines.  A key's unit is its
suffix (``_cm``, ``_nm``, ``_s``, ``_K``, ``_J``, ``_cm_inv``).  A value may
repeat the unit after the number (``sigma_cm = 0.01 cm``); a different unit
is an error.  Every problem is collected with its line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

KINDS = ("energy-gain", "laser-loss", "excitation", "cosmology", "superposition",
         "fock-sim", "validate")

UNITS = {"cm": "cm", "nm": "nm", "s": "s", "K": "K", "J": "J", "cm_inv": "cm^-1"}


@dataclass(frozen=True)
class Key:
    type: type
    default: object = None      # None means required (unless in an either-of group)
    check: str = ""             # "pos", "nonneg", "" or a choice list "a|b|c"


_COMMON = {
    "lambda_rate": Key(float, 1e-16, "nonneg"),
    "a_cm": Key(float, 1e-5, "pos"),
    "lambda_bar_N_cm": Key(float, 2.1e-14, "pos"),
    "override": Key(bool, False),
}

_PULSE = {
    "lambda0_nm": Key(float, math.nan, "pos"),
    "lambda0_cm": Key(float, math.nan, "pos"),
    "k0_cm_inv": Key(float, math.nan, "pos"),
    "sigma_cm": Key(float, None, "pos"),
    "n0": Key(float, math.nan, "nonneg"),
    "energy_J": Key(float, math.nan, "pos"),
    "t_s": Key(float, 1.0, "nonneg"),
}

SCHEMAS = {
    "energy-gain": {
        **_COMMON,
        "M_cm_inv": Key(float, 0.0, "nonneg"),
        "k1a_min": Key(float, 0.01, "pos"),
        "k1a_max": Key(float, 100.0, "pos"),
        "points": Key(int, 9, "pos"),
    },
    "laser-loss": {**_COMMON, **_PULSE},
    "excitation": {
        **_COMMON, **_PULSE,
        "form": Key(str, "full", "full|small_k0a"),
        "points": Key(int, 512, "pos"),
        "t_year_s": Key(float, 3.0e7, "pos"),
    },
    "cosmology": {
        **_COMMON,
        "T0_K": Key(float, 2.72548, "pos"),
        "t0_s": Key(float, 4.0e17, "pos"),
        "Z0": Key(float, 1000.0, "pos"),
        "delta": Key(float, 2e-4, "pos"),
        "lambda_min_cm": Key(float, 0.05, "pos"),
        "lambda_max_cm": Key(float, 50.0, "pos"),
        "points_per_decade": Key(int, 40, "pos"),
    },
    "superposition": {
        **_COMMON,
        "N": Key(float, None, "pos"),
        "sigma_cm": Key(float, None, "pos"),
        "k0_cm_inv": Key(float, None, "pos"),
        "M_cm_inv": Key(float, 0.0, "nonneg"),
        "d_cm": Key(float, None, "nonneg"),
        "t_s": Key(float, 1.0, "nonneg"),
        "oracle": Key(bool, False),
        "samples": Key(int, 1_000_000, "pos"),
    },
    "fock-sim": {
        **_COMMON,
        "modes": Key(str, None),
        "L_cm": Key(float, None, "pos"),
        "M_cm_inv": Key(float, 0.0, "nonneg"),
        "nmax": Key(int, 3, "pos"),
        "c0": Key(float, math.nan, "nonneg"),
        "state": Key(str, "thermal", "thermal|number|superposition|coherent"),
        "beta_cm": Key(float, 2.0, "pos"),
        "occupations": Key(str, ""),
        "occupations_b": Key(str, ""),
        "alphas": Key(str, ""),
        "t_end_s": Key(float, None, "pos"),
        "points": Key(int, 11, "pos"),
    },
    "validate": {
        "samples": Key(int, 1_000_000, "pos"),
        "quick": Key(bool, False),
    },
}

# at least one key of each group must be set
EITHER = {
    "laser-loss": [("lambda0_nm", "lambda0_cm", "k0_cm_inv"), ("n0", "energy_J")],
    "excitation": [("lambda0_nm", "lambda0_cm", "k0_cm_inv"), ("n0", "energy_J")],
}


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class ScenarioConfig:
    kind: str
    params: dict
    source: str = ""
    lines: dict = field(default_factory=dict)   # key -> line number

    def get(self, key):
        return self.params[key]

    def is_set(self, key) -> bool:
        v = self.params.get(key)
        return not (isinstance(v, float) and math.isnan(v))

    def echo(self) -> list[str]:
        return [f"{k} = {self.params[k]}" for k in sorted(self.params)]


def _key_unit(key):
    for suffix in sorted(UNITS, key=len, reverse=True):
        if key.endswith("_" + suffix):
            return suffix
    return None


def _parse_bool(text):
    t = text.lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _convert(key, spec: Key, raw: str):
    if spec.type is str:
        return raw
    if spec.type is bool:
        return _parse_bool(raw)
    parts = raw.split()
    if len(parts) == 2:
        unit = _key_unit(key)
        given = parts[1].replace("^-1", "_inv").replace("cm-1", "cm_inv")
        if unit is None:
            raise ValueError(f"unit mismatch: {key} is dimensionless, got {parts[1]!r}")
        if given != unit:
            raise ValueError(f"unit mismatch: {key} expects {UNITS[unit]}, got {parts[1]!r}")
        raw = parts[0]
    elif len(parts) != 1:
        raise ValueError(f"cannot parse value {raw!r}")
    if spec.type is int:
        v = float(raw)
        if v != int(v):
            raise ValueError(f"{key} must be an integer")
        v = int(v)
    else:
        v = float(raw)
    if not math.isfinite(v):
        raise ValueError(f"{key} must be finite")
    if spec.check == "pos" and not v > 0:
        raise ValueError(f"{key} must be > 0")
    if spec.check == "nonneg" and not v >= 0:
        raise ValueError(f"{key} must be ≥ 0")
    return v


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    errors = []
    kind = None
    values, lines = {}, {}
    for num, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("[") and body.endswith("]"):
            name = body[1:-1].strip()
            if kind is not None:
                errors.append(f"line {num}: second scenario header [{name}]")
            elif name not in KINDS:
                errors.append(f"line {num}: unknown scenario kind {name!r}; expected one of {', '.join(KINDS)}")
                kind = ""
            else:
                kind = name
            continue
        if "=" not in body:
            errors.append(f"line {num}: expected 'key = value', got {body!r}")
            continue
        key, raw = (s.strip() for s in body.split("=", 1))
        if kind is None:
            errors.append(f"line {num}: '{key}' appears before the scenario header")
            continue
        if not kind:
            continue
        schema = SCHEMAS[kind]
        if key not in schema:
            errors.append(f"line {num}: unknown key '{key}' for [{kind}]")
            continue
        if key in values:
            errors.append(f"line {num}: duplicate key '{key}' (first on line {lines[key]})")
            continue
        try:
            values[key] = _convert(key, schema[key], raw)
            lines[key] = num
        except ValueError as exc:
            errors.append(f"line {num}: {exc}")
            lines[key] = num

    if kind is None:
        raise ConfigError(errors + ["missing scenario kind"])
    if kind:
        schema = SCHEMAS[kind]
        for key, spec in schema.items():
            if key in values or key in lines:
                continue
            if spec.default is None:
                errors.append(f"missing key '{key}' for [{kind}]")
            else:
                values[key] = spec.default
        for group in EITHER.get(kind, []):
            set_ = [k for k in group if k in lines]
            if not set_:
                errors.append(f"[{kind}] needs one of {', '.join(group)}")
            elif len(set_) > 1:
                errors.append(f"line {lines[set_[1]]}: give only one of {', '.join(group)}")
        for key, spec in schema.items():
            if spec.type is str and "|" in spec.check and key in values:
                if values[key] not in spec.check.split("|"):
                    errors.append(f"line {lines.get(key, 0)}: {key} must be one of {spec.check.replace('|', ', ')}")
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(kind, values, source, lines)
