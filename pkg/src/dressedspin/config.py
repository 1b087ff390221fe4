"""INI-style run configuration with mandatory unit suffixes.

Dimensionful keys carry their unit in the key name (``t_c_ghz``,
``ramp_time_us``, ``phase_rad``) and are converted to base units (Hz,
seconds, radians, tesla) at parse time, so a bare number can never be
misread by three orders of magnitude.  Dimensionless keys (counts, ratios,
names) take no suffix.  Values may be single numbers, comma-separated lists,
or bare strings.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

SECTIONS = ("system", "protocol", "output")

# suffix -> multiplier into the base unit
_UNIT_SUFFIXES = {
    "thz": 1e12,
    "ghz": 1e9,
    "mhz": 1e6,
    "khz": 1e3,
    "hz": 1.0,
    "ms": 1e-3,
    "us": 1e-6,
    "ns": 1e-9,
    "ps": 1e-12,
    "s": 1.0,
    "rad": 1.0,
    "tesla": 1.0,
}


class ConfigError(ValueError):
    """Malformed configuration: unknown key, bad value, or missing field."""


def split_unit_suffix(key: str) -> tuple[str, float | None]:
    """Strip a recognized unit suffix, returning (canonical key, multiplier)."""
    for suffix in sorted(_UNIT_SUFFIXES, key=len, reverse=True):
        if key.endswith("_" + suffix):
            return key[: -(len(suffix) + 1)], _UNIT_SUFFIXES[suffix]
    return key, None


def _parse_scalar(text: str):
    text = text.strip()
    try:
        v = float(text)
    except ValueError:
        return text
    return v


def parse_value(text: str):
    if "," in text:
        return [_parse_scalar(p) for p in text.split(",") if p.strip()]
    return _parse_scalar(text)


@dataclass
class RunConfig:
    """Resolved configuration: canonical keys mapped to base-unit values."""

    system: dict = field(default_factory=dict)
    protocol: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        if name not in SECTIONS:
            raise ConfigError(f"unknown config section {name!r}")
        return getattr(self, name)

    def set_entry(self, section: str, key: str, raw):
        canonical, mult = split_unit_suffix(key)
        value = parse_value(raw) if isinstance(raw, str) else raw
        if mult is not None:
            if isinstance(value, list):
                if not all(isinstance(v, float) for v in value):
                    raise ConfigError(f"{section}.{key}: unit-suffixed keys need numeric values")
                value = [v * mult for v in value]
            elif isinstance(value, float):
                value = value * mult
            else:
                raise ConfigError(f"{section}.{key}: unit-suffixed keys need numeric values")
        target = self.section(section)
        if canonical in target:
            raise ConfigError(f"duplicate setting for {section}.{canonical} (check unit variants)")
        target[canonical] = value

    def items(self):
        for name in SECTIONS:
            for key in sorted(self.section(name)):
                yield name, key, self.section(name)[key]


def load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"config file not found: {path}")
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            cfg.set_entry(section, key, raw)
    return cfg


def apply_override(cfg: RunConfig, assignment: str) -> None:
    """Apply one ``--set section.key=value`` override."""
    if "=" not in assignment:
        raise ConfigError(f"--set expects section.key=value, got {assignment!r}")
    key, _, raw = assignment.partition("=")
    if "." not in key:
        raise ConfigError(f"--set key must be section.key, got {key!r}")
    section, _, name = key.strip().partition(".")
    canonical, _ = split_unit_suffix(name.strip())
    target = cfg.section(section.strip())
    target.pop(canonical, None)  # overrides replace file settings
    cfg.set_entry(section.strip(), name.strip(), raw)


def required(section: dict, section_name: str, *names: str):
    """Fetch required canonical fields, naming every missing one."""
    missing = [n for n in names if n not in section]
    if missing:
        pretty = ", ".join(f"{section_name}.{n}" for n in missing)
        raise ConfigError(f"missing required config field(s): {pretty}")
    return [section[n] for n in names]


def as_int(value, what: str) -> int:
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, int):
        return value
    raise ConfigError(f"{what} must be an integer, got {value!r}")
