"""
Instance and scenario files

    # comment
    [instance]
    t0 = 0
    tm = 10
    ...

Sections are [instance], [limits], [oracle], [output] for single-vehicle
instances and [geometry], [limits], [safety], [output] plus one [vehicle]
section per vehicle for scenarios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from config import Config
from models import BoundaryConditions, InvalidProblemError, Limits, TrajectoryError
from scenario import REAR_END_SAMPLES, Approach, Geometry, Movement, VehicleSpec


class ConfigError(TrajectoryError):
    """Malformed or invalid config file"""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = path or "<config>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


@dataclass
class Section:
    name: str
    line: int
    values: Dict[str, Tuple[str, int]]

    def has(self, key: str) -> bool:
        return key in self.values

    def line_of(self, key: str) -> int:
        return self.values[key][1] if key in self.values else self.line


INSTANCE_SECTIONS = {
    "instance": {"t0", "tm", "p0", "pm", "v0"},
    "limits": {"u_min", "u_max", "v_min", "v_max"},
    "oracle": {"grid", "solver"},
    "output": {"samples", "csv", "summary"},
}

SCENARIO_SECTIONS = {
    "geometry": {"L", "S"},
    "limits": INSTANCE_SECTIONS["limits"],
    "safety": {"standstill", "headway", "samples"},
    "output": {"samples", "prefix", "report"},
    "vehicle": {"id", "approach", "movement", "t0", "v0", "tm"},
}

REPEATABLE = {"vehicle"}


def parse_sections(text: str, allowed: Dict[str, set], path: Optional[str] = None) -> List[Section]:
    """Split text into sections, checking names and keys as they appear"""
    sections: List[Section] = []
    current: Optional[Section] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"unterminated section header {line!r}", lineno, path)
            name = line[1:-1].strip()
            if name not in allowed:
                raise ConfigError(f"unknown section [{name}]", lineno, path)
            if name not in REPEATABLE and any(s.name == name for s in sections):
                raise ConfigError(f"section [{name}] appears twice", lineno, path)
            current = Section(name, lineno, {})
            sections.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, path)
        if current is None:
            raise ConfigError("key outside of any section", lineno, path)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed[current.name]:
            raise ConfigError(f"unknown key {key!r} in [{current.name}]", lineno, path)
        if key in current.values:
            raise ConfigError(f"duplicate key {key!r} in [{current.name}]", lineno, path)
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno, path)
        current.values[key] = (value, lineno)
    return sections


def _find(sections: List[Section], name: str) -> Optional[Section]:
    for section in sections:
        if section.name == name:
            return section
    return None


def _require(sections: List[Section], name: str, path: Optional[str]) -> Section:
    section = _find(sections, name)
    if section is None:
        raise ConfigError(f"missing section [{name}]", None, path)
    return section


def _float(section: Optional[Section], key: str, path: Optional[str], default: Optional[float] = None) -> float:
    if section is None or not section.has(key):
        if default is None:
            where = section.line if section else None
            raise ConfigError(f"missing key {key!r}" + (f" in [{section.name}]" if section else ""), where, path)
        return default
    value, lineno = section.values[key]
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}", lineno, path) from None
    if math.isnan(number):
        raise ConfigError(f"{key} must not be NaN", lineno, path)
    return number


def _int(section: Optional[Section], key: str, path: Optional[str], default: Optional[int] = None) -> int:
    if section is None or not section.has(key):
        if default is None:
            raise ConfigError(f"missing key {key!r}", section.line if section else None, path)
        return default
    value, lineno = section.values[key]
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}", lineno, path) from None


def _str(section: Optional[Section], key: str, default: Optional[str] = None) -> Optional[str]:
    if section is None or not section.has(key):
        return default
    return section.values[key][0]


def _limits(sections: List[Section], path: Optional[str]) -> Limits:
    section = _find(sections, "limits")
    defaults = Config.default_limits()
    values = {key: _float(section, key, path, default) for key, default in defaults.items()}
    try:
        return Limits(**values)
    except InvalidProblemError as e:
        raise ConfigError(str(e), section.line if section else None, path) from None


# ==================== INSTANCE FILES ====================

@dataclass(frozen=True)
class InstanceConfig:
    bc: BoundaryConditions
    limits: Limits
    grid: int
    solver: str
    samples: int
    csv_name: str
    summary_name: str


def parse_instance(text: str, path: Optional[str] = None) -> InstanceConfig:
    sections = parse_sections(text, INSTANCE_SECTIONS, path)
    inst = _require(sections, "instance", path)
    values = {key: _float(inst, key, path) for key in ("t0", "tm", "p0", "pm", "v0")}
    try:
        bc = BoundaryConditions(**values)
    except InvalidProblemError as e:
        raise ConfigError(str(e), inst.line, path) from None

    oracle = _find(sections, "oracle")
    output = _find(sections, "output")
    stem = Path(path).stem if path else "instance"
    samples = _int(output, "samples", path, Config.SAMPLES)
    if samples < 2:
        raise ConfigError(f"samples must be at least 2, got {samples}",
                          output.line_of("samples") if output else None, path)

    return InstanceConfig(
        bc=bc,
        limits=_limits(sections, path),
        grid=_int(oracle, "grid", path, Config.GRID),
        solver=_str(oracle, "solver", Config.QP_SOLVER),
        samples=samples,
        csv_name=_str(output, "csv", f"{stem}.csv"),
        summary_name=_str(output, "summary", f"{stem}.summary.txt"),
    )


def load_instance(path: str) -> InstanceConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", None, path) from None
    return parse_instance(text, path)


# ==================== SCENARIO FILES ====================

@dataclass(frozen=True)
class ScenarioConfig:
    geometry: Geometry
    limits: Limits
    vehicles: Tuple[VehicleSpec, ...]
    standstill: float
    headway: float
    check_samples: int
    samples: int
    prefix: str
    report_name: str


def _enum(section: Section, key: str, enum_cls, path: Optional[str]):
    value = _str(section, key)
    if value is None:
        raise ConfigError(f"missing key {key!r} in [vehicle]", section.line, path)
    try:
        return enum_cls(value.lower())
    except ValueError:
        choices = ", ".join(member.value for member in enum_cls)
        raise ConfigError(f"{key} must be one of {choices}, got {value!r}", section.line_of(key), path) from None


def _vehicle(section: Section, path: Optional[str]) -> VehicleSpec:
    try:
        return VehicleSpec(
            id=_int(section, "id", path),
            approach=_enum(section, "approach", Approach, path),
            movement=_enum(section, "movement", Movement, path),
            t0=_float(section, "t0", path),
            v0=_float(section, "v0", path),
            tm=_float(section, "tm", path),
        )
    except InvalidProblemError as e:
        raise ConfigError(str(e), section.line, path) from None


def parse_scenario(text: str, path: Optional[str] = None) -> ScenarioConfig:
    sections = parse_sections(text, SCENARIO_SECTIONS, path)
    geo = _require(sections, "geometry", path)
    try:
        geometry = Geometry(L=_float(geo, "L", path), S=_float(geo, "S", path))
    except InvalidProblemError as e:
        raise ConfigError(str(e), geo.line, path) from None

    vehicles = [_vehicle(section, path) for section in sections if section.name == "vehicle"]
    if not vehicles:
        raise ConfigError("a scenario needs at least one [vehicle] section", None, path)
    seen = {}
    for section, spec in zip((s for s in sections if s.name == "vehicle"), vehicles):
        if spec.id in seen:
            raise ConfigError(f"duplicate vehicle id {spec.id} (first at line {seen[spec.id]})",
                              section.line, path)
        seen[spec.id] = section.line

    safety = _find(sections, "safety")
    output = _find(sections, "output")
    stem = Path(path).stem if path else "scenario"
    return ScenarioConfig(
        geometry=geometry,
        limits=_limits(sections, path),
        vehicles=tuple(vehicles),
        standstill=_float(safety, "standstill", path, Config.STANDSTILL),
        headway=_float(safety, "headway", path, Config.HEADWAY),
        check_samples=_int(safety, "samples", path, REAR_END_SAMPLES),
        samples=_int(output, "samples", path, Config.SAMPLES),
        prefix=_str(output, "prefix", stem),
        report_name=_str(output, "report", f"{stem}.safety.txt"),
    )


def load_scenario(path: str) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", None, path) from None
    return parse_scenario(text, path)
