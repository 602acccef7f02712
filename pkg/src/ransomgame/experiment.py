"""Scenario files, parameter sweeps and CSV output.

Scenario and sweep files share one format: ``key = value`` lines, ``#``
comments, dotted prefixes for sections::

    group1.size = 100
    group1.F = 5
    C_B = 1

Group 2 is optional; missing group-2 fields copy group 1 and its size
defaults to 0 (a single-group study).
"""

from __future__ import annotations

import csv
import dataclasses
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .model import GlobalParams, GroupParams, Groups, ParameterError
from .solver import (
    CYCLE_TOLERANCE,
    DEFAULT_TOLERANCE,
    MAX_ITERATIONS,
    SO_GRID_POINTS,
    OutcomeKind,
    SolveOutcome,
    SocialOptimum,
    find_equilibrium,
    social_optimum,
)


class ConfigError(Exception):
    """Base class for problems with scenario or sweep files."""


class ConfigParseError(ConfigError):
    pass


class ConfigValidationError(ConfigError):
    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.name = name


GROUP_FIELDS = {
    "size": "size",
    "G": "size",
    "wealth": "wealth",
    "W": "wealth",
    "failure_loss": "failure_loss",
    "F": "failure_loss",
    "ransom_loss": "ransom_loss",
    "L": "ransom_loss",
    "interruption_loss": "interruption_loss",
    "T": "interruption_loss",
}

GLOBAL_FIELDS = {
    "discount": "discount",
    "beta": "discount",
    "base_difficulty": "base_difficulty",
    "D": "base_difficulty",
    "backup_unit_cost": "backup_unit_cost",
    "C_B": "backup_unit_cost",
    "attack_unit_cost": "attack_unit_cost",
    "C_A": "attack_unit_cost",
    "dev_cost": "dev_cost",
    "C_D": "dev_cost",
}

SOLVER_FIELDS = ("tolerance", "max_iterations", "cycle_tolerance", "so_grid_points")

# Short names usable as sweep axes and --set keys.
SWEEP_PARAMETERS = (
    "C_B", "C_A", "beta", "L1", "L2", "F1", "F2", "T1", "T2", "D", "C_D", "G1", "G2", "W1", "W2",
)


def canonical_key(key: str) -> str:
    """Map any accepted spelling of a parameter to ``section.field``."""
    key = key.strip()
    if key in SWEEP_PARAMETERS and key[-1] in "12" and key[0] in "LFTGW":
        return f"group{key[-1]}.{GROUP_FIELDS[key[:-1]]}"
    section, _, name = key.rpartition(".")
    if section in ("group1", "group2") and name in GROUP_FIELDS:
        return f"{section}.{GROUP_FIELDS[name]}"
    if section in ("", "globals") and name in GLOBAL_FIELDS:
        return f"globals.{GLOBAL_FIELDS[name]}"
    if section == "solver" and name in SOLVER_FIELDS:
        return key
    raise ConfigValidationError(key, "unknown parameter")


def parse_key_values(text: str, source: str = "<text>") -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigParseError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        values[key.strip()] = value.strip()
    return values


@dataclass(frozen=True)
class SolverSettings:
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = MAX_ITERATIONS
    cycle_tolerance: float = CYCLE_TOLERANCE
    so_grid_points: int = SO_GRID_POINTS


@dataclass(frozen=True)
class ScenarioConfig:
    group_1: GroupParams
    group_2: GroupParams
    gparams: GlobalParams
    solver: SolverSettings = field(default_factory=SolverSettings)

    @property
    def groups(self) -> Groups:
        return (self.group_1, self.group_2)


def _number(name: str, text: str, integer: bool = False):
    try:
        value = float(text)
    except ValueError:
        raise ConfigValidationError(name, f"not a number: {text!r}") from None
    if integer:
        if not value.is_integer():
            raise ConfigValidationError(name, f"must be an integer (got {text!r})")
        return int(value)
    return value


def build_config(raw: Mapping[str, str]) -> ScenarioConfig:
    """Validate a raw key/value mapping into a scenario."""
    canon: Dict[str, str] = {}
    for key, value in raw.items():
        canon[canonical_key(key)] = str(value)

    def group(j: int, fallback: Optional[Dict[str, object]]) -> Dict[str, object]:
        out: Dict[str, object] = {}
        for name in ("size", "wealth", "failure_loss", "ransom_loss", "interruption_loss"):
            key = f"group{j}.{name}"
            if key in canon:
                out[name] = _number(key, canon[key], integer=(name == "size"))
            elif fallback is None:
                raise ConfigValidationError(key, "missing")
            else:
                out[name] = 0 if name == "size" else fallback[name]
        return out

    g1 = group(1, None)
    g2 = group(2, g1)
    glob: Dict[str, float] = {}
    for name in sorted(set(GLOBAL_FIELDS.values())):
        key = f"globals.{name}"
        if key not in canon:
            raise ConfigValidationError(key, "missing")
        glob[name] = _number(key, canon[key])
    solver: Dict[str, object] = {}
    for name in SOLVER_FIELDS:
        key = f"solver.{name}"
        if key in canon:
            solver[name] = _number(key, canon[key], integer=name in ("max_iterations", "so_grid_points"))
    try:
        settings = SolverSettings(**solver)
        if not settings.tolerance > 0 or not settings.cycle_tolerance > 0:
            raise ParameterError("solver.tolerance", "must be > 0")
        if settings.max_iterations < 2:
            raise ParameterError("solver.max_iterations", "must be >= 2")
        if settings.so_grid_points < 2:
            raise ParameterError("solver.so_grid_points", "must be >= 2")
        groups = []
        for j, values in ((1, g1), (2, g2)):
            try:
                groups.append(GroupParams(**values))
            except ParameterError as exc:
                raise ParameterError(f"group{j}.{exc.field}", exc.message) from None
        try:
            gparams = GlobalParams(**glob)
        except ParameterError as exc:
            raise ParameterError(f"globals.{exc.field}", exc.message) from None
    except ParameterError as exc:
        raise ConfigValidationError(exc.field, exc.message) from None
    return ScenarioConfig(groups[0], groups[1], gparams, settings)


def parse_overrides(items: Iterable[str]) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigParseError(f"override must look like KEY=VALUE (got {item!r})")
        out[key.strip()] = value.strip()
    return out


def apply_overrides(raw: Mapping[str, str], overrides: Mapping[str, str]) -> Dict[str, str]:
    """Overrides replace any spelling of the same parameter in ``raw``."""
    merged: Dict[str, str] = {}
    for key, value in raw.items():
        merged[canonical_key(key)] = value
    for key, value in overrides.items():
        merged[canonical_key(key)] = value
    return merged


def load_raw(path) -> Dict[str, str]:
    path = Path(path)
    return parse_key_values(path.read_text(), str(path))


def load_config(path, overrides: Optional[Mapping[str, str]] = None) -> ScenarioConfig:
    """Read, override and validate a scenario file.

    Raises OSError for unreadable files, ConfigParseError for malformed
    lines and ConfigValidationError naming the offending parameter.
    """
    raw = load_raw(path)
    return build_config(apply_overrides(raw, overrides or {}))


def config_to_raw(config: ScenarioConfig) -> Dict[str, str]:
    raw: Dict[str, str] = {}
    for j, g in ((1, config.group_1), (2, config.group_2)):
        for f in dataclasses.fields(g):
            raw[f"group{j}.{f.name}"] = repr(getattr(g, f.name))
    for f in dataclasses.fields(config.gparams):
        raw[f"globals.{f.name}"] = repr(getattr(config.gparams, f.name))
    for f in dataclasses.fields(config.solver):
        raw[f"solver.{f.name}"] = repr(getattr(config.solver, f.name))
    return raw


# --------------------------------------------------------------------- sweeps

OUTPUT_COLUMNS = (
    "NE_org_payoff", "NE_org1_payoff", "NE_org2_payoff", "NE_att_payoff", "NE_agg_payoff",
    "NE_b", "NE_b1", "NE_b2", "NE_a1", "NE_a2", "NE_r",
    "SO_org_payoff", "SO_org1_payoff", "SO_org2_payoff", "SO_att_payoff", "SO_agg_payoff",
    "SO_b", "SO_b1", "SO_b2", "SO_a1", "SO_a2", "SO_r",
    "state",
)


@dataclass(frozen=True)
class Axis:
    name: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    axes: Tuple[Axis, ...]
    outputs: Tuple[str, ...]
    overrides: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigValidationError("axes", "a sweep has one or two axes")
        names = [a.name for a in self.axes]
        for axis in self.axes:
            if axis.name not in SWEEP_PARAMETERS:
                raise ConfigValidationError(axis.name, "not a sweepable parameter")
            if not axis.values:
                raise ConfigValidationError(axis.name, "empty range")
        if not self.outputs:
            raise ConfigValidationError("outputs", "no output columns")
        for col in self.outputs:
            if col not in names and col not in OUTPUT_COLUMNS:
                raise ConfigValidationError("outputs", f"unknown column {col!r}")

    @property
    def needs_social_optimum(self) -> bool:
        return any(c.startswith("SO_") for c in self.outputs)


def axis_values(start: float, stop: float, step: Optional[float] = None, count: Optional[int] = None):
    if (step is None) == (count is None):
        raise ConfigValidationError("axis", "give exactly one of step or count")
    if stop < start:
        raise ConfigValidationError("axis", f"stop {stop} is below start {start}")
    if count is not None:
        if count < 1:
            raise ConfigValidationError("axis.count", "must be >= 1")
        if count == 1:
            return (float(start),)
        return tuple(float(x) for x in np.linspace(start, stop, count))
    if not step > 0:
        raise ConfigValidationError("axis.step", "must be > 0")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    # Rounding keeps grid values free of accumulated binary noise (0.15, not 0.15000000000000002).
    return tuple(round(start + i * step, 12) for i in range(n))


def parse_sweep_spec(text: str, source: str = "<text>") -> SweepSpec:
    kv = parse_key_values(text, source)
    axes = []
    for i in (1, 2):
        name = kv.get(f"axis{i}")
        if name is None:
            continue

        def num(key, integer=False):
            full = f"axis{i}.{key}"
            return _number(full, kv[full], integer) if full in kv else None

        start, stop = num("start"), num("stop")
        if start is None or stop is None:
            raise ConfigValidationError(f"axis{i}", "needs start and stop")
        axes.append(Axis(name, axis_values(start, stop, num("step"), num("count", integer=True))))
    if "outputs" not in kv:
        raise ConfigValidationError("outputs", "missing")
    outputs = tuple(c.strip() for c in kv["outputs"].split(",") if c.strip())
    overrides = tuple((k[4:], v) for k, v in kv.items() if k.startswith("set."))
    known = {f"axis{i}{s}" for i in (1, 2) for s in ("", ".start", ".stop", ".step", ".count")}
    for key in kv:
        if key not in known and key != "outputs" and not key.startswith("set."):
            raise ConfigValidationError(key, "unknown sweep key")
    return SweepSpec(tuple(axes), outputs, overrides)


def load_sweep_spec(path) -> SweepSpec:
    path = Path(path)
    return parse_sweep_spec(path.read_text(), str(path))


@dataclass
class SweepTable:
    columns: List[str]
    rows: List[Dict[str, object]]


def _profile_columns(prefix: str, defenders, attacker, report, aggregate) -> Dict[str, float]:
    return {
        f"{prefix}_org_payoff": report.org_payoff_1,
        f"{prefix}_org1_payoff": report.org_payoff_1,
        f"{prefix}_org2_payoff": report.org_payoff_2,
        f"{prefix}_att_payoff": report.attacker_payoff,
        f"{prefix}_agg_payoff": aggregate,
        f"{prefix}_b": defenders.backup_1,
        f"{prefix}_b1": defenders.backup_1,
        f"{prefix}_b2": defenders.backup_2,
        f"{prefix}_a1": attacker.effort_1,
        f"{prefix}_a2": attacker.effort_2,
        f"{prefix}_r": attacker.ransom,
    }


def evaluate_point(config: ScenarioConfig, with_social_optimum: bool = True) -> Dict[str, object]:
    """All output columns for one scenario; NE fields are None when NOT_FOUND."""
    groups, gp, s = config.groups, config.gparams, config.solver
    row: Dict[str, object] = {}
    ne: SolveOutcome = find_equilibrium(
        groups, gp, s.tolerance, s.max_iterations, s.cycle_tolerance
    )
    row["state"] = ne.kind.value
    if ne.found:
        agg = groups[0].size * ne.report.org_payoff_1 + groups[1].size * ne.report.org_payoff_2
        row.update(_profile_columns("NE", ne.defenders, ne.attacker, ne.report, agg))
    if with_social_optimum:
        so: SocialOptimum = social_optimum(groups, gp, grid_points=s.so_grid_points)
        row.update(
            _profile_columns("SO", so.defenders, so.attacker, so.report, so.aggregate_org_payoff)
        )
    return row


def _point_config(base_raw: Mapping[str, str], assignment: Sequence[Tuple[str, float]]) -> ScenarioConfig:
    raw = dict(base_raw)
    for name, value in assignment:
        text = str(int(round(value))) if name in ("G1", "G2") else repr(value)
        raw[canonical_key(name)] = text
    return build_config(raw)


def _run_point(args) -> Dict[str, object]:
    base_raw, assignment, with_so = args
    row: Dict[str, object] = {name: value for name, value in assignment}
    try:
        row.update(evaluate_point(_point_config(base_raw, assignment), with_so))
    except (ConfigError, ValueError, ArithmeticError) as exc:
        row["state"] = "ERROR"
        row["error"] = str(exc)
    return row


def grid_points(spec: SweepSpec) -> List[Tuple[Tuple[str, float], ...]]:
    """Grid assignments in output order; the first axis is the outer loop."""
    if len(spec.axes) == 1:
        a = spec.axes[0]
        return [((a.name, x),) for x in a.values]
    a, b = spec.axes
    return [((a.name, x), (b.name, y)) for x in a.values for y in b.values]


def run_sweep(config: ScenarioConfig, spec: SweepSpec, jobs: int = 1) -> SweepTable:
    """Solve every grid point; failures are recorded per row, never raised.

    Social optima are computed only when an SO_* column is requested.
    """
    base_raw = apply_overrides(config_to_raw(config), dict(spec.overrides))
    build_config(base_raw)
    tasks = [(base_raw, point, spec.needs_social_optimum) for point in grid_points(spec)]
    if jobs and jobs > 1:
        # spawn, not fork: forking after numba's OpenMP pool has started aborts the child.
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
            rows = list(pool.map(_run_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_run_point(t) for t in tasks]
    columns = list(spec.outputs)
    if "state" not in columns and any(
        r["state"] not in (OutcomeKind.DETERRED_EQUILIBRIUM.value,
                           OutcomeKind.EXACT_EQUILIBRIUM.value,
                           OutcomeKind.AVERAGED_TWO_CYCLE.value)
        for r in rows
    ):
        columns.append("state")
    return SweepTable(columns, rows)


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value == 0:
            return "0"
        if math.isnan(value):
            return "nan"
        return format(value, ".12g")
    return str(value)


def write_csv(table: SweepTable, path) -> None:
    """Write the table with a header row; numbers carry 12 significant digits."""
    if not table.rows:
        raise ValueError("refusing to write an empty table")
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(row.get(c)) for c in table.columns])
