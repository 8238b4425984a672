"""Scenario documents: the map, the agent types, and their workflows.

A scenario is a JSON document with three top-level keys:

``map``
    ``cell_size_m`` (edge length of a grid cell, meters), ``width`` and
    ``height`` (cell counts), ``blocked`` (list of ``[x, y]`` unwalkable
    cells) and ``locations`` (name -> ``{cells, capacity, anchor}``).
    ``capacity`` limits simultaneous occupants (``null`` = unlimited) and
    ``anchor`` is the routing target point in meters; it defaults to the
    center of the first cell.

``agent_types``
    List of ``{name, population, arrival, desired_speed, radius, workflow}``.
    ``arrival`` is an entry tick, a per-agent list of ticks, or
    ``{"start": t, "interval": k}``.  ``desired_speed`` is a distribution in
    m/s, ``radius`` a body radius in meters.

``defaults``
    ``tick_length_s``, the wall-clock length of one simulation tick.

Workflow steps are ``goto``, ``dwell``, ``queue``, ``cycle`` and ``depart``.
Distributions are ``{"kind": "constant", "value": v}``,
``{"kind": "uniform", "min": a, "max": b}``,
``{"kind": "triangular", "min": a, "mode": m, "max": b}`` or
``{"kind": "exponential", "mean": m}``.  Dwell distributions are in seconds
and converted to whole ticks when sampled (half-up rounding).

Parsing is strict: unknown keys, dangling location references and malformed
distributions are rejected with a message naming the offender.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Union

import numpy as np

DISTRIBUTION_KINDS = ("constant", "uniform", "triangular", "exponential")


class ScenarioError(ValueError):
    """A scenario document failed to parse or validate."""


def _fail(msg: str) -> None:
    raise ScenarioError(msg)


def round_half_up(x: float) -> int:
    # round() would round 2.5 ticks down; schedule math wants half-up.
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class Distribution:
    """A nonnegative scalar distribution (seconds for dwells, m/s for speeds)."""

    kind: str
    params: tuple[float, ...]

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "uniform":
            lo, hi = self.params
            return float(rng.uniform(lo, hi)) if hi > lo else lo
        if self.kind == "triangular":
            lo, mode, hi = self.params
            return float(rng.triangular(lo, mode, hi)) if hi > lo else lo
        if self.kind == "exponential":
            return float(rng.exponential(self.params[0]))
        raise AssertionError(f"unreachable kind {self.kind!r}")

    def mean(self) -> float:
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "uniform":
            return (self.params[0] + self.params[1]) / 2.0
        if self.kind == "triangular":
            return sum(self.params) / 3.0
        return self.params[0]

    def to_json(self) -> dict[str, Any]:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.params[0]}
        if self.kind == "uniform":
            return {"kind": "uniform", "min": self.params[0], "max": self.params[1]}
        if self.kind == "triangular":
            return {
                "kind": "triangular",
                "min": self.params[0],
                "mode": self.params[1],
                "max": self.params[2],
            }
        return {"kind": "exponential", "mean": self.params[0]}


def _parse_distribution(obj: Any, where: str, positive: bool = False) -> Distribution:
    if not isinstance(obj, dict):
        _fail(f"{where}: distribution must be an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind not in DISTRIBUTION_KINDS:
        _fail(f"{where}: unknown distribution kind {kind!r}")
    fields = {
        "constant": ("value",),
        "uniform": ("min", "max"),
        "triangular": ("min", "mode", "max"),
        "exponential": ("mean",),
    }[kind]
    extra = set(obj) - {"kind", *fields}
    if extra:
        _fail(f"{where}: unexpected distribution keys {sorted(extra)}")
    params = []
    for name in fields:
        if name not in obj:
            _fail(f"{where}: {kind} distribution is missing {name!r}")
        v = obj[name]
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            _fail(f"{where}: {name} must be a number")
        params.append(float(v))
    lo_bound = 0.0
    if positive and any(p <= lo_bound for p in params):
        _fail(f"{where}: {kind} parameters must be > 0")
    if not positive and any(p < lo_bound for p in params):
        _fail(f"{where}: {kind} parameters must be >= 0")
    if kind in ("uniform", "triangular"):
        if sorted(params) != params:
            order = " <= ".join(fields)
            _fail(f"{where}: expected {order}")
    return Distribution(kind, tuple(params))


def sample_duration(
    dist: Distribution, rng: np.random.Generator, tick_length: float
) -> int:
    """Draw a dwell time in seconds and convert it to whole ticks (half-up)."""
    seconds = dist.sample(rng)
    ticks = round_half_up(seconds / tick_length)
    return max(ticks, 0)


# --- workflow steps ---------------------------------------------------------


@dataclass(frozen=True)
class GoTo:
    location: str


@dataclass(frozen=True)
class Dwell:
    duration: Distribution


@dataclass(frozen=True)
class Queue:
    location: str


@dataclass(frozen=True)
class Cycle:
    steps: tuple["WorkflowStep", ...]
    repeat: int | None = None
    until_tick: int | None = None


@dataclass(frozen=True)
class Depart:
    pass


WorkflowStep = Union[GoTo, Dwell, Queue, Cycle, Depart]


def _parse_step(obj: Any, where: str, depth: int) -> WorkflowStep:
    if not isinstance(obj, dict):
        _fail(f"{where}: step must be an object")
    kind = obj.get("kind")
    if kind == "goto" or kind == "queue":
        extra = set(obj) - {"kind", "location"}
        if extra:
            _fail(f"{where}: unexpected keys {sorted(extra)}")
        loc = obj.get("location")
        if not isinstance(loc, str) or not loc:
            _fail(f"{where}: {kind} needs a location name")
        return GoTo(loc) if kind == "goto" else Queue(loc)
    if kind == "dwell":
        extra = set(obj) - {"kind", "duration"}
        if extra:
            _fail(f"{where}: unexpected keys {sorted(extra)}")
        if "duration" not in obj:
            _fail(f"{where}: dwell needs a duration distribution")
        return Dwell(_parse_distribution(obj["duration"], f"{where}.duration"))
    if kind == "cycle":
        if depth > 0:
            _fail(f"{where}: cycles do not nest")
        extra = set(obj) - {"kind", "steps", "repeat", "until_tick"}
        if extra:
            _fail(f"{where}: unexpected keys {sorted(extra)}")
        raw = obj.get("steps")
        if not isinstance(raw, list) or not raw:
            _fail(f"{where}: cycle body must be a non-empty list of steps")
        steps = tuple(
            _parse_step(s, f"{where}.steps[{i}]", depth + 1) for i, s in enumerate(raw)
        )
        if any(isinstance(s, Depart) for s in steps):
            _fail(f"{where}: depart cannot appear inside a cycle")
        repeat = obj.get("repeat")
        until = obj.get("until_tick")
        if (repeat is None) == (until is None):
            _fail(f"{where}: cycle needs exactly one of repeat / until_tick")
        if repeat is not None and (not isinstance(repeat, int) or repeat < 1):
            _fail(f"{where}: repeat must be an integer >= 1")
        if until is not None and (not isinstance(until, int) or until < 0):
            _fail(f"{where}: until_tick must be an integer >= 0")
        return Cycle(steps, repeat, until)
    if kind == "depart":
        if set(obj) - {"kind"}:
            _fail(f"{where}: depart takes no other keys")
        return Depart()
    _fail(f"{where}: unknown step kind {kind!r}")
    raise AssertionError


def _step_to_json(step: WorkflowStep) -> dict[str, Any]:
    if isinstance(step, GoTo):
        return {"kind": "goto", "location": step.location}
    if isinstance(step, Queue):
        return {"kind": "queue", "location": step.location}
    if isinstance(step, Dwell):
        return {"kind": "dwell", "duration": step.duration.to_json()}
    if isinstance(step, Cycle):
        out: dict[str, Any] = {
            "kind": "cycle",
            "steps": [_step_to_json(s) for s in step.steps],
        }
        if step.repeat is not None:
            out["repeat"] = step.repeat
        else:
            out["until_tick"] = step.until_tick
        return out
    return {"kind": "depart"}


# --- map --------------------------------------------------------------------


@dataclass(frozen=True)
class Location:
    name: str
    cells: tuple[tuple[int, int], ...]
    capacity: int | None
    anchor: tuple[float, float]


@dataclass(frozen=True)
class EnvironmentMap:
    cell_size: float
    width: int
    height: int
    blocked: frozenset[tuple[int, int]]
    locations: dict[str, Location] = field(hash=False)

    def cell_center(self, cell: tuple[int, int]) -> tuple[float, float]:
        return ((cell[0] + 0.5) * self.cell_size, (cell[1] + 0.5) * self.cell_size)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor(x / self.cell_size)), int(math.floor(y / self.cell_size)))

    def in_bounds(self, cell: tuple[int, int]) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def walkable(self, cell: tuple[int, int]) -> bool:
        return self.in_bounds(cell) and cell not in self.blocked

    @cached_property
    def occupancy(self) -> np.ndarray:
        """Boolean (width, height) array, True where the cell is walkable."""
        occ = np.ones((self.width, self.height), dtype=bool)
        for x, y in self.blocked:
            occ[x, y] = False
        return occ

    @cached_property
    def location_of_cell(self) -> np.ndarray:
        """Int (width, height) array mapping each cell to a location index, -1 if none."""
        idx = np.full((self.width, self.height), -1, dtype=np.int32)
        for i, name in enumerate(sorted(self.locations)):
            for x, y in self.locations[name].cells:
                idx[x, y] = i
        return idx


def _parse_cell(obj: Any, where: str, m: dict[str, Any]) -> tuple[int, int]:
    if (
        not isinstance(obj, list)
        or len(obj) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in obj)
    ):
        _fail(f"{where}: cell must be a [x, y] integer pair")
    x, y = obj
    if not (0 <= x < m["width"] and 0 <= y < m["height"]):
        _fail(f"{where}: cell [{x}, {y}] is outside the {m['width']}x{m['height']} grid")
    return (x, y)


def _parse_map(obj: Any) -> EnvironmentMap:
    if not isinstance(obj, dict):
        _fail("map must be an object")
    extra = set(obj) - {"cell_size_m", "width", "height", "blocked", "locations"}
    if extra:
        _fail(f"map: unexpected keys {sorted(extra)}")
    cell_size = obj.get("cell_size_m")
    if not isinstance(cell_size, (int, float)) or isinstance(cell_size, bool) or cell_size <= 0:
        _fail("map.cell_size_m must be a positive number")
    dims = {}
    for k in ("width", "height"):
        v = obj.get(k)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            _fail(f"map.{k} must be a positive integer")
        dims[k] = v
    blocked = set()
    for i, raw in enumerate(obj.get("blocked", [])):
        blocked.add(_parse_cell(raw, f"map.blocked[{i}]", dims))

    locations: dict[str, Location] = {}
    claimed: dict[tuple[int, int], str] = {}
    raw_locs = obj.get("locations", {})
    if not isinstance(raw_locs, dict):
        _fail("map.locations must be an object of name -> location")
    for name, raw in raw_locs.items():
        where = f"map.locations[{name!r}]"
        if not isinstance(raw, dict):
            _fail(f"{where}: must be an object")
        extra = set(raw) - {"cells", "capacity", "anchor"}
        if extra:
            _fail(f"{where}: unexpected keys {sorted(extra)}")
        raw_cells = raw.get("cells")
        if not isinstance(raw_cells, list) or not raw_cells:
            _fail(f"{where}: cells must be a non-empty list")
        cells = []
        for i, c in enumerate(raw_cells):
            cell = _parse_cell(c, f"{where}.cells[{i}]", dims)
            if cell in blocked:
                _fail(f"{where}: cell {list(cell)} is blocked")
            if cell in claimed:
                _fail(f"{where}: cell {list(cell)} already belongs to {claimed[cell]!r}")
            claimed[cell] = name
            cells.append(cell)
        cells = tuple(sorted(set(cells)))
        capacity = raw.get("capacity")
        if capacity is not None and (
            not isinstance(capacity, int) or isinstance(capacity, bool) or capacity < 1
        ):
            _fail(f"{where}: capacity must be null or an integer >= 1")
        cs = float(cell_size)
        if "anchor" in raw:
            a = raw["anchor"]
            if (
                not isinstance(a, list)
                or len(a) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in a)
            ):
                _fail(f"{where}: anchor must be an [x_m, y_m] pair")
            anchor = (float(a[0]), float(a[1]))
            acell = (int(math.floor(anchor[0] / cs)), int(math.floor(anchor[1] / cs)))
            if acell not in cells:
                _fail(f"{where}: anchor {list(a)} does not fall inside the location cells")
        else:
            anchor = ((cells[0][0] + 0.5) * cs, (cells[0][1] + 0.5) * cs)
        locations[name] = Location(name, cells, capacity, anchor)

    return EnvironmentMap(
        cell_size=float(cell_size),
        width=dims["width"],
        height=dims["height"],
        blocked=frozenset(blocked),
        locations=locations,
    )


# --- agent types ------------------------------------------------------------


@dataclass(frozen=True)
class AgentTypeSpec:
    name: str
    population: int
    arrival: tuple[int, ...]
    desired_speed: Distribution
    radius: float
    workflow: tuple[WorkflowStep, ...]


DEFAULT_BODY_RADIUS = 0.25  # m


def _parse_arrival(obj: Any, population: int, where: str) -> tuple[int, ...]:
    def check_tick(v: Any, w: str) -> int:
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            _fail(f"{w}: arrival ticks must be integers >= 0")
        return v

    if isinstance(obj, int) and not isinstance(obj, bool):
        return (check_tick(obj, where),) * population
    if isinstance(obj, list):
        if len(obj) != population:
            _fail(f"{where}: arrival list has {len(obj)} entries for population {population}")
        return tuple(check_tick(v, f"{where}[{i}]") for i, v in enumerate(obj))
    if isinstance(obj, dict):
        extra = set(obj) - {"start", "interval"}
        if extra:
            _fail(f"{where}: unexpected arrival keys {sorted(extra)}")
        start = check_tick(obj.get("start", 0), f"{where}.start")
        interval = obj.get("interval", 0)
        if not isinstance(interval, int) or isinstance(interval, bool) or interval < 0:
            _fail(f"{where}.interval: must be an integer >= 0")
        return tuple(start + i * interval for i in range(population))
    _fail(f"{where}: arrival must be a tick, a list of ticks, or {{start, interval}}")
    raise AssertionError


def _arrival_to_json(arrival: tuple[int, ...]) -> Any:
    if len(set(arrival)) <= 1:
        return arrival[0] if arrival else 0
    return list(arrival)


def _validate_workflow(
    steps: tuple[WorkflowStep, ...], locations: dict[str, Location], where: str
) -> None:
    if not steps:
        _fail(f"{where}: workflow must not be empty")
    if not isinstance(steps[0], (GoTo, Queue)):
        _fail(f"{where}: the first step must be goto or queue so the agent has a spawn point")

    def flat(seq: tuple[WorkflowStep, ...], prefix: str) -> None:
        for i, step in enumerate(seq):
            w = f"{prefix}[{i}]"
            if isinstance(step, (GoTo, Queue)) and step.location not in locations:
                _fail(f"{w}: unknown location {step.location!r}")
            if isinstance(step, Depart) and (prefix != where or i != len(seq) - 1):
                _fail(f"{w}: depart must be the final step")
            if isinstance(step, Queue):
                nxt = seq[i + 1] if i + 1 < len(seq) else None
                if not isinstance(nxt, GoTo):
                    _fail(f"{w}: queue must be immediately followed by a goto")
            if isinstance(step, Cycle):
                flat(step.steps, f"{w}.steps")

    flat(steps, where)


def _parse_agent_type(obj: Any, idx: int, locations: dict[str, Location]) -> AgentTypeSpec:
    where = f"agent_types[{idx}]"
    if not isinstance(obj, dict):
        _fail(f"{where}: must be an object")
    extra = set(obj) - {"name", "population", "arrival", "desired_speed", "radius", "workflow"}
    if extra:
        _fail(f"{where}: unexpected keys {sorted(extra)}")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        _fail(f"{where}: name must be a non-empty string")
    where = f"agent_types[{name!r}]"
    population = obj.get("population")
    if not isinstance(population, int) or isinstance(population, bool) or population < 0:
        _fail(f"{where}: population must be an integer >= 0")
    arrival = _parse_arrival(obj.get("arrival", 0), population, f"{where}.arrival")
    speed = _parse_distribution(
        obj.get("desired_speed", {"kind": "uniform", "min": 1.2, "max": 1.5}),
        f"{where}.desired_speed",
        positive=True,
    )
    radius = obj.get("radius", DEFAULT_BODY_RADIUS)
    if not isinstance(radius, (int, float)) or isinstance(radius, bool) or radius <= 0:
        _fail(f"{where}: radius must be a positive number")
    raw_steps = obj.get("workflow")
    if not isinstance(raw_steps, list):
        _fail(f"{where}: workflow must be a list of steps")
    steps = tuple(
        _parse_step(s, f"{where}.workflow[{i}]", 0) for i, s in enumerate(raw_steps)
    )
    _validate_workflow(steps, locations, f"{where}.workflow")
    return AgentTypeSpec(name, population, arrival, speed, float(radius), steps)


# --- scenario ---------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    map: EnvironmentMap
    agent_types: tuple[AgentTypeSpec, ...]
    tick_length: float

    @property
    def type_names(self) -> list[str]:
        return [t.name for t in self.agent_types]

    @property
    def populations(self) -> dict[str, int]:
        return {t.name: t.population for t in self.agent_types}

    @property
    def total_population(self) -> int:
        return sum(t.population for t in self.agent_types)


def parse_scenario(text: str) -> Scenario:
    """Parse a scenario JSON document, validating schema and references."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        _fail("scenario document must be a JSON object")
    extra = set(doc) - {"map", "agent_types", "defaults"}
    if extra:
        _fail(f"unexpected top-level keys {sorted(extra)}")
    if "map" not in doc:
        _fail("scenario is missing the map")
    env = _parse_map(doc["map"])

    raw_types = doc.get("agent_types", [])
    if not isinstance(raw_types, list):
        _fail("agent_types must be a list")
    types = tuple(_parse_agent_type(t, i, env.locations) for i, t in enumerate(raw_types))
    seen: set[str] = set()
    for t in types:
        if t.name in seen:
            _fail(f"duplicate agent type name {t.name!r}")
        seen.add(t.name)

    defaults = doc.get("defaults", {})
    if not isinstance(defaults, dict):
        _fail("defaults must be an object")
    extra = set(defaults) - {"tick_length_s"}
    if extra:
        _fail(f"defaults: unexpected keys {sorted(extra)}")
    tick = defaults.get("tick_length_s", 1.0)
    if not isinstance(tick, (int, float)) or isinstance(tick, bool) or tick <= 0:
        _fail("defaults.tick_length_s must be a positive number")

    return Scenario(map=env, agent_types=types, tick_length=float(tick))


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def scenario_to_json(s: Scenario) -> dict[str, Any]:
    """Canonical dict form: sorted blocked cells and location names."""
    locs = {}
    for name in sorted(s.map.locations):
        loc = s.map.locations[name]
        locs[name] = {
            "cells": [list(c) for c in loc.cells],
            "capacity": loc.capacity,
            "anchor": list(loc.anchor),
        }
    return {
        "map": {
            "cell_size_m": s.map.cell_size,
            "width": s.map.width,
            "height": s.map.height,
            "blocked": [list(c) for c in sorted(s.map.blocked)],
            "locations": locs,
        },
        "agent_types": [
            {
                "name": t.name,
                "population": t.population,
                "arrival": _arrival_to_json(t.arrival),
                "desired_speed": t.desired_speed.to_json(),
                "radius": t.radius,
                "workflow": [_step_to_json(st) for st in t.workflow],
            }
            for t in s.agent_types
        ],
        "defaults": {"tick_length_s": s.tick_length},
    }


def serialize_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_json(s), indent=2, sort_keys=True) + "\n"
