"""Tick-based crowd simulation driven by per-type workflows.

Each tick runs four phases in a fixed order: arrivals, workflow advancement
(agent id order), admission grants (location name order, FIFO by request
tick then agent id), then a number of physics substeps.  The frame emitted
at the end of a tick shows every agent present during that tick.

Movement uses a mass-normalized social force: relaxation toward the desired
velocity plus exponential repulsion from nearby agents and from blocked
cells, integrated with one Euler step per substep.  Speed is capped at a
multiple of the agent's own desired speed, and motion never enters a blocked
cell; a step that would do so slides along the wall or stops.

Capacity is slot accounting: an agent heading to a full location keeps the
location's cells off-limits for itself and piles up at the boundary until a
slot frees.  Slots map to berth points (the anchor first, then the other
cells, then deterministic offsets), so simultaneous occupants never share an
exact position.  Agents passing through on the way to somewhere else are not
gated.

Everything is deterministic for a given (scenario, config): per-agent random
streams are seeded from (seed, agent index), and all iteration orders are
fixed.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import routing
from .contacts import pairs_within
from .frames import TickFrame
from .scenario import (
    Cycle,
    Depart,
    Dwell,
    EnvironmentMap,
    GoTo,
    Location,
    Queue,
    Scenario,
    sample_duration,
)

GOLDEN = 0.6180339887498949  # 1/phi, for quasi-random angles

_EPS = 1e-12


@dataclass(frozen=True)
class ForceParameters:
    relaxation_time: float = 0.5  # s
    repulsion_strength: float = 2.1  # m/s^2
    repulsion_range: float = 0.3  # m
    obstacle_strength: float = 10.0  # m/s^2
    obstacle_range: float = 0.2  # m
    max_speed_factor: float = 1.3  # cap = factor * desired speed


@dataclass(frozen=True)
class SimConfig:
    ticks: int
    seed: int = 0
    tick_length: float | None = None  # None: use the scenario default
    physics_substeps: int = 10
    waypoint_threshold: float = 0.5  # m
    forces: ForceParameters = field(default_factory=ForceParameters)

    def __post_init__(self) -> None:
        if self.ticks < 0:
            raise ValueError("ticks must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.tick_length is not None and self.tick_length <= 0:
            raise ValueError("tick_length must be > 0")
        if self.physics_substeps < 1:
            raise ValueError("physics_substeps must be >= 1")
        if self.waypoint_threshold <= 0:
            raise ValueError("waypoint_threshold must be > 0")


@dataclass(frozen=True)
class RunSummary:
    ticks: int
    agents: int
    arrivals: int
    departures: int


class SimulationFault(RuntimeError):
    """The run could not continue (for example, an unreachable location)."""


def _pair_direction(i: int, j: int) -> tuple[float, float]:
    """Deterministic unit vector used when two agents coincide exactly."""
    t = ((i + 1) * GOLDEN + (j + 1) * GOLDEN * GOLDEN) % 1.0
    a = 2.0 * math.pi * t
    return math.cos(a), math.sin(a)


def _obstacle_centers(env: EnvironmentMap) -> np.ndarray:
    """Centers of blocked cells plus a one-cell wall ring around the map."""
    cells = sorted(env.blocked)
    for x in range(-1, env.width + 1):
        cells.append((x, -1))
        cells.append((x, env.height))
    for y in range(env.height):
        cells.append((-1, y))
        cells.append((env.width, y))
    if not cells:
        return np.empty((0, 2))
    arr = np.array(cells, dtype=np.float64)
    return (arr + 0.5) * env.cell_size


def _allowed_cells(
    env: EnvironmentMap, points: np.ndarray, forbidden: np.ndarray, exempt: np.ndarray
) -> np.ndarray:
    """Per point: the cell is walkable and not gated for that agent."""
    cs = env.cell_size
    cx = np.floor(points[:, 0] / cs).astype(np.int64)
    cy = np.floor(points[:, 1] / cs).astype(np.int64)
    inside = (cx >= 0) & (cx < env.width) & (cy >= 0) & (cy < env.height)
    ok = np.zeros(len(points), dtype=bool)
    if inside.any():
        gx, gy = cx[inside], cy[inside]
        walk = env.occupancy[gx, gy]
        loc = env.location_of_cell[gx, gy]
        fb = forbidden[inside]
        gate = (fb >= 0) & (loc == fb) & ~exempt[inside]
        ok[inside] = walk & ~gate
    return ok


def _contain(
    env: EnvironmentMap,
    pos: np.ndarray,
    cand: np.ndarray,
    vel: np.ndarray,
    forbidden: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Truncate steps that would enter a blocked or gated cell (slide, else stop)."""
    cs = env.cell_size
    ccx = np.floor(pos[:, 0] / cs).astype(np.int64)
    ccy = np.floor(pos[:, 1] / cs).astype(np.int64)
    in_grid = (ccx >= 0) & (ccx < env.width) & (ccy >= 0) & (ccy < env.height)
    cur_loc = np.full(len(pos), -1, dtype=np.int64)
    cur_loc[in_grid] = env.location_of_cell[ccx[in_grid], ccy[in_grid]]
    # an agent already standing inside its gated location may keep moving
    exempt = (forbidden >= 0) & (cur_loc == forbidden)

    ok = _allowed_cells(env, cand, forbidden, exempt)
    bad = np.nonzero(~ok)[0]
    if len(bad) == 0:
        return cand, vel
    cand = cand.copy()
    vel = vel.copy()

    trial_x = np.column_stack([cand[bad, 0], pos[bad, 1]])
    ok_x = _allowed_cells(env, trial_x, forbidden[bad], exempt[bad])
    xi = bad[ok_x]
    cand[xi, 0] = trial_x[ok_x, 0]
    cand[xi, 1] = pos[xi, 1]
    vel[xi, 1] = 0.0

    rest = bad[~ok_x]
    if len(rest):
        trial_y = np.column_stack([pos[rest, 0], cand[rest, 1]])
        ok_y = _allowed_cells(env, trial_y, forbidden[rest], exempt[rest])
        yi = rest[ok_y]
        cand[yi, 0] = pos[yi, 0]
        cand[yi, 1] = trial_y[ok_y, 1]
        vel[yi, 0] = 0.0
        stay = rest[~ok_y]
        cand[stay] = pos[stay]
        vel[stay] = 0.0
    return cand, vel


def _obstacle_acceleration(
    env: EnvironmentMap,
    centers: np.ndarray,
    pos: np.ndarray,
    radii: np.ndarray,
    params: ForceParameters,
) -> np.ndarray:
    n = len(pos)
    acc = np.zeros((n, 2))
    if len(centers) == 0 or n == 0:
        return acc
    cs = env.cell_size
    reach = float(radii.max()) + 4.0 * params.obstacle_range
    pts = np.vstack([pos, centers])
    ids = np.arange(len(pts), dtype=np.int64)
    # center distance overshoots the rectangle distance by at most half a diagonal
    ia, ib, _ = pairs_within(ids, pts, reach + cs * 0.7072)
    mask = (ia < n) & (ib >= n)
    if not mask.any():
        return acc
    agent = ia[mask]
    cell = ib[mask] - n
    lo = centers[cell] - cs / 2.0
    hi = centers[cell] + cs / 2.0
    closest = np.clip(pos[agent], lo, hi)
    dvec = pos[agent] - closest
    d = np.hypot(dvec[:, 0], dvec[:, 1])
    nz = d > _EPS  # agents never sit inside a blocked cell
    mag = params.obstacle_strength * np.exp((radii[agent[nz]] - d[nz]) / params.obstacle_range)
    np.add.at(acc, agent[nz], (mag / d[nz])[:, None] * dvec[nz])
    return acc


def social_force_step(
    positions: np.ndarray,
    velocities: np.ndarray,
    targets: np.ndarray,
    desired_speeds: np.ndarray,
    radii: np.ndarray,
    dt: float,
    params: ForceParameters,
    env: EnvironmentMap | None = None,
    moving: np.ndarray | None = None,
    forbidden: np.ndarray | None = None,
    _obstacles: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """One Euler substep; returns (positions, velocities) as new arrays.

    Agents outside ``moving`` stay frozen but still repel the others.  With
    an environment, blocked cells repel and the step is truncated so nobody
    ends up inside one; ``forbidden`` optionally names one location index per
    agent whose cells that agent may not enter.
    """
    n = len(positions)
    pos = np.array(positions, dtype=np.float64)
    vel = np.array(velocities, dtype=np.float64)
    if n == 0:
        return pos, vel
    if moving is None:
        moving = np.ones(n, dtype=bool)
    if not moving.any():
        return pos, vel

    acc = np.zeros((n, 2))
    delta = targets - pos
    dist = np.hypot(delta[:, 0], delta[:, 1])
    ehat = np.zeros_like(delta)
    far = dist > _EPS
    ehat[far] = delta[far] / dist[far, None]
    acc += (desired_speeds[:, None] * ehat - vel) / params.relaxation_time

    cutoff = 2.0 * float(radii.max()) + 8.0 * params.repulsion_range
    ia, ib, d = pairs_within(np.arange(n, dtype=np.int64), pos, cutoff)
    if len(ia):
        dvec = pos[ia] - pos[ib]
        dirs = np.zeros_like(dvec)
        nz = d > _EPS
        dirs[nz] = dvec[nz] / d[nz, None]
        for k in np.nonzero(~nz)[0]:
            dirs[k] = _pair_direction(int(ia[k]), int(ib[k]))
        mag = params.repulsion_strength * np.exp((radii[ia] + radii[ib] - d) / params.repulsion_range)
        f = mag[:, None] * dirs
        np.add.at(acc, ia, f)
        np.add.at(acc, ib, -f)

    if env is not None:
        centers = _obstacles if _obstacles is not None else _obstacle_centers(env)
        acc += _obstacle_acceleration(env, centers, pos, radii, params)

    mv = moving
    v = vel[mv] + dt * acc[mv]
    vmax = params.max_speed_factor * desired_speeds[mv]
    speed = np.hypot(v[:, 0], v[:, 1])
    over = speed > vmax
    if over.any():
        v[over] *= (vmax[over] / speed[over])[:, None]
    cand = pos[mv] + dt * v
    if env is not None:
        fb = forbidden[mv] if forbidden is not None else np.full(int(mv.sum()), -1, dtype=np.int64)
        cand, v = _contain(env, pos[mv], cand, v, fb)
    pos[mv] = cand
    vel[mv] = v
    return pos, vel


# --- workflow machinery -------------------------------------------------------


class _Cursor:
    """Walks a workflow, expanding cycles; current() is always a plain step."""

    def __init__(self, steps: tuple):
        self.stack: list[list] = [[steps, 0, None, 0]]  # steps, idx, cycle, loops

    def done(self) -> bool:
        return not self.stack

    def current(self):
        steps, idx, _, _ = self.stack[-1]
        return steps[idx]

    def peek_next(self):
        steps, idx, _, _ = self.stack[-1]
        return steps[idx + 1] if idx + 1 < len(steps) else None

    def normalize(self, now_tick: int) -> None:
        while self.stack:
            steps, idx, cyc, loops = self.stack[-1]
            if idx >= len(steps):
                if cyc is not None:
                    loops += 1
                    again = (cyc.repeat is not None and loops < cyc.repeat) or (
                        cyc.until_tick is not None and now_tick < cyc.until_tick
                    )
                    if again:
                        self.stack[-1][1] = 0
                        self.stack[-1][3] = loops
                        break
                self.stack.pop()
                if self.stack:
                    self.stack[-1][1] += 1
                continue
            step = steps[idx]
            if isinstance(step, Cycle):
                if step.until_tick is not None and now_tick >= step.until_tick:
                    self.stack[-1][1] += 1
                    continue
                self.stack.append([step.steps, 0, step, 0])
                continue
            break

    def advance(self, now_tick: int) -> None:
        self.stack[-1][1] += 1
        self.normalize(now_tick)


class _Agent:
    __slots__ = (
        "index", "type_idx", "spec", "rng", "arrival", "v0",
        "phase", "cursor", "dwell_remaining", "waypoints", "wp_i",
        "slots", "pending_loc", "queue_mode", "queue_next",
    )

    def __init__(self, index, type_idx, spec, arrival, rng):
        self.index = index
        self.type_idx = type_idx
        self.spec = spec
        self.arrival = arrival
        self.rng = rng
        self.v0 = spec.desired_speed.sample(rng)
        self.phase = "offsite"  # offsite/moving/dwelling/queue_wait/idle/done
        self.cursor = _Cursor(spec.workflow)
        self.dwell_remaining = 0
        self.waypoints: list[tuple[float, float]] = []
        self.wp_i = 0
        self.slots: dict[str, int] = {}
        self.pending_loc: str | None = None
        self.queue_mode = False
        self.queue_next: str | None = None


class _LocationState:
    __slots__ = ("loc", "holders", "free_berths", "next_berth", "waiters", "wait_points")

    def __init__(self, loc: Location):
        self.loc = loc
        self.holders: set[int] = set()
        self.free_berths: list[int] = []
        self.next_berth = 0
        self.waiters: list[tuple[int, int]] = []  # (request tick, agent index)
        self.wait_points = 0

    def take_berth(self, agent_index: int) -> int:
        k = heapq.heappop(self.free_berths) if self.free_berths else self._bump()
        self.holders.add(agent_index)
        return k

    def _bump(self) -> int:
        k = self.next_berth
        self.next_berth += 1
        return k

    def release(self, agent_index: int, berth: int) -> None:
        self.holders.discard(agent_index)
        heapq.heappush(self.free_berths, berth)

    def has_free(self) -> bool:
        cap = self.loc.capacity
        return cap is None or len(self.holders) < cap


def berth_point(env: EnvironmentMap, loc: Location, k: int) -> tuple[float, float]:
    """Standing point for berth k: anchor, then other cell centers, then offsets."""
    anchor_cell = env.cell_of(*loc.anchor)
    bases = [loc.anchor] + [env.cell_center(c) for c in loc.cells if c != anchor_cell]
    base = bases[k % len(bases)]
    ring = k // len(bases)
    if ring == 0:
        return base
    r = 0.15 * env.cell_size * math.sqrt(ring)
    a = 2.0 * math.pi * ((ring * GOLDEN) % 1.0)
    return (base[0] + r * math.cos(a), base[1] + r * math.sin(a))


class Simulation:
    def __init__(self, scenario: Scenario, config: SimConfig):
        self.scenario = scenario
        self.config = config
        self.env = scenario.map
        self.tick_length = config.tick_length if config.tick_length is not None else scenario.tick_length
        self.type_names = scenario.type_names
        self._loc_index = {name: i for i, name in enumerate(sorted(self.env.locations))}
        self._obstacles = _obstacle_centers(self.env)

        self.agents: list[_Agent] = []
        for t_idx, spec in enumerate(scenario.agent_types):
            for i in range(spec.population):
                index = len(self.agents)
                rng = np.random.default_rng(np.random.SeedSequence([config.seed, index]))
                self.agents.append(_Agent(index, t_idx, spec, spec.arrival[i], rng))
        n = len(self.agents)

        self.pos = np.zeros((n, 2))
        self.vel = np.zeros((n, 2))
        self.tgt = np.zeros((n, 2))
        self.v0 = np.array([a.v0 for a in self.agents], dtype=np.float64)
        self.radius = np.array([a.spec.radius for a in self.agents], dtype=np.float64)
        self.present = np.zeros(n, dtype=bool)
        self.frozen = np.zeros(n, dtype=bool)
        self.forbidden = np.full(n, -1, dtype=np.int64)

        self.loc_state = {name: _LocationState(loc) for name, loc in self.env.locations.items()}
        self.arrivals = 0
        self.departures = 0
        self._arrival_schedule: dict[int, list[int]] = {}
        for a in self.agents:
            self._arrival_schedule.setdefault(a.arrival, []).append(a.index)

    # -- slots -----------------------------------------------------------------

    def _grant(self, ag: _Agent, name: str) -> int:
        st = self.loc_state[name]
        berth = st.take_berth(ag.index)
        ag.slots[name] = berth
        if ag.pending_loc == name:
            ag.pending_loc = None
            self.forbidden[ag.index] = -1
        return berth

    def _release(self, ag: _Agent, name: str) -> None:
        berth = ag.slots.pop(name)
        self.loc_state[name].release(ag.index, berth)

    def _request(self, ag: _Agent, name: str, tick: int) -> bool:
        """Ask for a slot; returns True when granted on the spot."""
        st = self.loc_state[name]
        if st.has_free() and not st.waiters:
            self._grant(ag, name)
            return True
        st.waiters.append((tick, ag.index))
        ag.pending_loc = name
        self.forbidden[ag.index] = self._loc_index[name]
        return False

    def _drop_waiter(self, ag: _Agent) -> None:
        if ag.pending_loc is not None:
            st = self.loc_state[ag.pending_loc]
            st.waiters = [w for w in st.waiters if w[1] != ag.index]
            ag.pending_loc = None
            self.forbidden[ag.index] = -1

    # -- movement ---------------------------------------------------------------

    def _route_to(self, ag: _Agent, point: tuple[float, float], goal_name: str) -> None:
        start = self.env.cell_of(*self.pos[ag.index])
        goal = self.env.cell_of(*point)
        try:
            cells, _ = routing.shortest_cell_path(self.env, start, goal)
        except routing.NoRouteError as e:
            t_name = self.type_names[ag.type_idx]
            raise SimulationFault(
                f"agent {ag.index} ({t_name}) cannot reach location {goal_name!r}: {e}"
            ) from e
        waypoints = [self.env.cell_center(c) for c in cells[:-1]]
        waypoints.append(point)
        ag.waypoints = waypoints
        ag.wp_i = 0
        ag.phase = "moving"
        self.frozen[ag.index] = False
        self.tgt[ag.index] = waypoints[0]

    def _freeze(self, ag: _Agent, phase: str) -> None:
        ag.phase = phase
        self.frozen[ag.index] = True
        self.vel[ag.index] = 0.0
        self.tgt[ag.index] = self.pos[ag.index]

    # -- workflow -----------------------------------------------------------------

    def _begin_goto(self, ag: _Agent, name: str, tick: int, queue_mode: bool) -> None:
        for held in list(ag.slots):
            if held != name:
                self._release(ag, held)
        ag.queue_mode = queue_mode
        ag.queue_next = None
        loc = self.env.locations[name]
        if name in ag.slots:
            self._route_to(ag, berth_point(self.env, loc, ag.slots[name]), name)
        elif self._request(ag, name, tick):
            self._route_to(ag, berth_point(self.env, loc, ag.slots[name]), name)
        else:
            self._route_to(ag, loc.anchor, name)

    def _enter_current(self, ag: _Agent, tick: int) -> None:
        for _ in range(64):  # zero-length steps collapse within the tick
            if ag.cursor.done():
                self._freeze(ag, "idle")
                return
            step = ag.cursor.current()
            if isinstance(step, GoTo):
                self._begin_goto(ag, step.location, tick, queue_mode=False)
                return
            if isinstance(step, Queue):
                self._begin_goto(ag, step.location, tick, queue_mode=True)
                return
            if isinstance(step, Dwell):
                ticks = sample_duration(step.duration, ag.rng, self.tick_length)
                if ticks > 0:
                    ag.dwell_remaining = ticks
                    self._freeze(ag, "dwelling")
                    return
                ag.cursor.advance(tick)
                continue
            if isinstance(step, Depart):
                self._depart(ag)
                return
            raise AssertionError(f"unhandled step {step!r}")
        # a cycle of zero-length steps: hold for a tick rather than spin
        ag.dwell_remaining = 1
        self._freeze(ag, "dwelling")

    def _depart(self, ag: _Agent) -> None:
        for held in list(ag.slots):
            self._release(ag, held)
        self._drop_waiter(ag)
        self.present[ag.index] = False
        self._freeze(ag, "done")
        self.departures += 1

    def _goto_target_name(self, ag: _Agent) -> str:
        step = ag.cursor.current()
        return step.location  # only called while current step is GoTo/Queue

    def _reached_target(self, ag: _Agent) -> bool:
        if not ag.waypoints or ag.wp_i != len(ag.waypoints) - 1:
            return False
        dx = self.pos[ag.index, 0] - ag.waypoints[-1][0]
        dy = self.pos[ag.index, 1] - ag.waypoints[-1][1]
        return math.hypot(dx, dy) <= self.config.waypoint_threshold

    def _spawn_wait_point(self, loc: Location, serial: int) -> tuple[float, float]:
        cs = self.env.cell_size
        ax, ay = loc.anchor
        for k in range(64):
            t = serial * 64 + k
            r = cs * (0.9 + 0.22 * math.sqrt(t + 1))
            a = 2.0 * math.pi * ((t * GOLDEN) % 1.0)
            p = (ax + r * math.cos(a), ay + r * math.sin(a))
            cell = self.env.cell_of(*p)
            if self.env.walkable(cell) and cell not in loc.cells:
                return p
        return loc.anchor  # degenerate map; capacity is then best-effort

    def _process_arrival(self, ag: _Agent, tick: int) -> None:
        self.present[ag.index] = True
        self.arrivals += 1
        ag.cursor.normalize(tick)
        step = ag.cursor.current()  # validated: goto or queue
        name = step.location
        ag.queue_mode = isinstance(step, Queue)
        loc = self.env.locations[name]
        st = self.loc_state[name]
        if st.has_free() and not st.waiters:
            self._grant(ag, name)
            point = berth_point(self.env, loc, ag.slots[name])
            self.pos[ag.index] = point
            ag.waypoints = [point]
            ag.wp_i = 0
            ag.phase = "moving"
            self.frozen[ag.index] = False
            self.tgt[ag.index] = point
        else:
            st.waiters.append((tick, ag.index))
            ag.pending_loc = name
            self.forbidden[ag.index] = self._loc_index[name]
            self.pos[ag.index] = self._spawn_wait_point(loc, st.wait_points)
            st.wait_points += 1
            self._route_to(ag, loc.anchor, name)

    def _tick_workflow(self, ag: _Agent, tick: int) -> None:
        if ag.phase == "dwelling":
            ag.dwell_remaining -= 1
            if ag.dwell_remaining <= 0:
                ag.cursor.advance(tick)
                self._enter_current(ag, tick)
        elif ag.phase == "moving":
            name = self._goto_target_name(ag)
            if name not in ag.slots or not self._reached_target(ag):
                return
            if ag.queue_mode:
                nxt = ag.cursor.peek_next()
                ag.queue_next = nxt.location  # validated: queue precedes a goto
                if ag.queue_next in ag.slots or self._request(ag, ag.queue_next, tick):
                    # slot already in hand: fall straight through to the goto
                    ag.cursor.advance(tick)
                    self._enter_current(ag, tick)
                else:
                    self._freeze(ag, "queue_wait")
            else:
                ag.cursor.advance(tick)
                self._enter_current(ag, tick)

    def _grant_pass(self, tick: int) -> None:
        for name in sorted(self.loc_state):
            st = self.loc_state[name]
            if not st.waiters:
                continue
            st.waiters.sort()
            while st.waiters and st.has_free():
                _, idx = st.waiters.pop(0)
                ag = self.agents[idx]
                self._grant(ag, name)
                point = berth_point(self.env, st.loc, ag.slots[name])
                if ag.phase == "queue_wait" and ag.queue_next == name:
                    ag.cursor.advance(tick)
                    self._enter_current(ag, tick)
                elif ag.phase == "moving":
                    self._route_to(ag, point, name)

    # -- physics ---------------------------------------------------------------

    def _advance_waypoints(self, g_idx: np.ndarray, pos: np.ndarray, tgt: np.ndarray,
                           moving: np.ndarray) -> None:
        thr = self.config.waypoint_threshold
        d2 = (pos[:, 0] - tgt[:, 0]) ** 2 + (pos[:, 1] - tgt[:, 1]) ** 2
        near = np.nonzero(moving & (d2 <= thr * thr))[0]
        for li in near:
            ag = self.agents[g_idx[li]]
            if not ag.waypoints:
                continue
            while ag.wp_i < len(ag.waypoints) - 1:
                wx, wy = ag.waypoints[ag.wp_i]
                if (pos[li, 0] - wx) ** 2 + (pos[li, 1] - wy) ** 2 > thr * thr:
                    break
                ag.wp_i += 1
            wx, wy = ag.waypoints[ag.wp_i]
            if ag.wp_i == len(ag.waypoints) - 1 and (pos[li, 0] - wx) ** 2 + (
                pos[li, 1] - wy
            ) ** 2 <= thr * thr:
                tgt[li] = pos[li]  # close enough: brake and let the workflow take over
            else:
                tgt[li] = (wx, wy)

    def _physics(self) -> None:
        g_idx = np.nonzero(self.present)[0]
        if len(g_idx) == 0:
            return
        pos = self.pos[g_idx]
        vel = self.vel[g_idx]
        tgt = self.tgt[g_idx]
        speeds = self.v0[g_idx]
        radii = self.radius[g_idx]
        fb = self.forbidden[g_idx]
        moving = ~self.frozen[g_idx]
        dt = self.tick_length / self.config.physics_substeps
        for _ in range(self.config.physics_substeps):
            self._advance_waypoints(g_idx, pos, tgt, moving)
            pos, vel = social_force_step(
                pos, vel, tgt, speeds, radii, dt, self.config.forces,
                env=self.env, moving=moving, forbidden=fb, _obstacles=self._obstacles,
            )
        self.pos[g_idx] = pos
        self.vel[g_idx] = vel
        self.tgt[g_idx] = tgt

    # -- main loop ---------------------------------------------------------------

    def run(self, observer: Callable[[TickFrame], None] | None = None) -> RunSummary:
        n = len(self.agents)
        ids = np.arange(n, dtype=np.int64)
        type_ids = np.array([a.type_idx for a in self.agents], dtype=np.int32)
        for tick in range(self.config.ticks):
            for idx in self._arrival_schedule.get(tick, ()):
                self._process_arrival(self.agents[idx], tick)
            for ag in self.agents:
                if self.present[ag.index] and ag.phase in ("dwelling", "moving"):
                    self._tick_workflow(ag, tick)
            self._grant_pass(tick)
            self._physics()
            if observer is not None:
                sel = self.present
                observer(
                    TickFrame(
                        tick=tick,
                        ids=ids[sel].copy(),
                        type_ids=type_ids[sel].copy(),
                        positions=self.pos[sel].copy(),
                        type_names=self.type_names,
                    )
                )
        return RunSummary(
            ticks=self.config.ticks,
            agents=n,
            arrivals=self.arrivals,
            departures=self.departures,
        )


def run(
    scenario: Scenario, config: SimConfig, observer: Callable[[TickFrame], None] | None = None
) -> RunSummary:
    """Simulate a scenario for config.ticks ticks, feeding frames to observer."""
    return Simulation(scenario, config).run(observer)
