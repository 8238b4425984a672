"""Proximity contact detection and the per-pair contact ledger.

Two agents are in contact during a tick when their distance is at or below
the effective radius (the boundary counts).  While a pair stays in range the
ledger keeps one open record per pair and folds each tick into a running
duration and running mean distance.  The tick the pair separates, the record
is closed but kept; if the pair meets again later a fresh record is opened,
so one pair can contribute several contacts over a run.

Frames must arrive in dense tick order.  Closed records are never revised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import TickFrame

_ID_LIMIT = 1 << 31  # ids are packed two-per-int64 for the open-pair index


class NonMonotonicTickError(ValueError):
    """Frames were observed out of dense tick order."""


@dataclass(frozen=True)
class ContactConfig:
    effective_radius: float = 2.0  # m
    tick_length: float = 1.0  # s
    min_duration: int = 1  # ticks; applied at aggregation, never at logging
    chunk_length: int = 900  # ticks per exposure chunk

    def __post_init__(self) -> None:
        if self.effective_radius <= 0:
            raise ValueError("effective_radius must be > 0")
        if self.tick_length <= 0:
            raise ValueError("tick_length must be > 0")
        if self.min_duration < 1:
            raise ValueError("min_duration must be >= 1 tick")
        if self.chunk_length < 1:
            raise ValueError("chunk_length must be >= 1 tick")


def _expand_blocks(
    g_start: np.ndarray, g_count: np.ndarray, ga: np.ndarray, gb: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """All (i, j) index pairs of the cross product of cell groups ga x gb.

    Groups are runs in the cell-sorted order; g_start/g_count describe them.
    Returns positions into that sorted order.
    """
    na, nb = g_count[ga], g_count[gb]
    m = na * nb
    total = int(m.sum())
    if total == 0:
        e = np.empty(0, dtype=np.int64)
        return e, e.copy()
    t = np.arange(total, dtype=np.int64)
    t -= np.repeat(np.cumsum(m) - m, m)
    q, r = np.divmod(t, np.repeat(nb, m))
    q += np.repeat(g_start[ga], m)
    r += np.repeat(g_start[gb], m)
    return q, r


def pairs_within(
    ids: np.ndarray, positions: np.ndarray, radius: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All unordered pairs with distance <= radius, sorted by (min id, max id).

    Uses a uniform grid with cell edge equal to the radius, so any qualifying
    pair sits in the same or an adjacent cell (3x3 neighbourhood).  Occupied
    cells are matched group-to-group, visiting each unordered cell pair once:
    a cell against itself plus its four forward neighbours of the stencil.
    Returns (id_a, id_b, distance) with id_a < id_b elementwise.
    """
    n = len(ids)
    empty = np.empty(0, dtype=np.int64)
    if n < 2:
        return empty, empty.copy(), np.empty(0, dtype=np.float64)

    cells = np.floor(positions / radius).astype(np.int64)
    cx = cells[:, 0] - cells[:, 0].min()
    cy = cells[:, 1] - cells[:, 1].min() + 1
    stride = cy.max() + 2  # keeps dy = +/-1 from wrapping into the next column
    key = cx * stride + cy
    order = np.argsort(key, kind="stable")
    uniq, g_start, g_count = np.unique(key[order], return_index=True, return_counts=True)

    parts_i = []
    parts_j = []

    # same cell: full product, upper triangle kept below
    self_g = np.nonzero(g_count >= 2)[0]
    i, j = _expand_blocks(g_start, g_count, self_g, self_g)
    keep = i < j
    parts_i.append(i[keep])
    parts_j.append(j[keep])

    # forward neighbours: E, NE, N, SE in grid terms
    for off in (stride, stride + 1, 1, stride - 1):
        pos = np.searchsorted(uniq, uniq + off)
        pos_c = np.minimum(pos, len(uniq) - 1)
        ok = uniq[pos_c] == uniq + off
        i, j = _expand_blocks(g_start, g_count, np.nonzero(ok)[0], pos[ok])
        parts_i.append(i)
        parts_j.append(j)

    cand_i = order[np.concatenate(parts_i)]
    cand_j = order[np.concatenate(parts_j)]
    if len(cand_i) == 0:
        return empty, empty.copy(), np.empty(0, dtype=np.float64)

    # component-wise gathers beat 2-D row gathers on this hot path
    px, py = np.ascontiguousarray(positions[:, 0]), np.ascontiguousarray(positions[:, 1])
    dx = px[cand_i] - px[cand_j]
    dy = py[cand_i] - py[cand_j]
    d2 = dx * dx + dy * dy
    in_range = d2 <= radius * radius
    cand_i, cand_j = cand_i[in_range], cand_j[in_range]
    dist = np.sqrt(d2[in_range])

    ids_i = ids[cand_i]
    ids_j = ids[cand_j]
    a = np.minimum(ids_i, ids_j)
    b = np.maximum(ids_i, ids_j)
    # a <= b elementwise, so these two bounds cover all four extremes
    if len(a) and a.min() >= 0 and int(b.max()) < 1 << 31:
        order_out = np.argsort((a << 31) | b, kind="stable")
    else:
        order_out = np.lexsort((b, a))
    return a[order_out], b[order_out], dist[order_out]


def neighbor_pairs(
    frame: TickFrame, radius: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Contact pairs for one frame: (id_a, id_b, distance), id_a < id_b."""
    return pairs_within(frame.ids, frame.positions, radius)


@dataclass(frozen=True)
class ContactRecord:
    """A read-only view of one logged contact episode."""

    id_a: int
    id_b: int
    type_a: int
    type_b: int
    start_tick: int
    last_updated_tick: int
    duration: int
    mean_distance: float
    in_session: bool


class ContactLedger:
    """Columnar store of contact records, updated one frame at a time."""

    _GROW = 1024

    def __init__(self, config: ContactConfig):
        self.config = config
        self._cap = self._GROW
        self._id_a = np.empty(self._cap, dtype=np.int64)
        self._id_b = np.empty(self._cap, dtype=np.int64)
        self._type_a = np.empty(self._cap, dtype=np.int32)
        self._type_b = np.empty(self._cap, dtype=np.int32)
        self._start = np.empty(self._cap, dtype=np.int64)
        self._last = np.empty(self._cap, dtype=np.int64)
        self._duration = np.empty(self._cap, dtype=np.int64)
        self._dist_sum = np.empty(self._cap, dtype=np.float64)
        self._open = np.empty(self._cap, dtype=bool)
        self._n = 0

        self._open_keys = np.empty(0, dtype=np.int64)
        self._open_idx = np.empty(0, dtype=np.int64)

        self.type_names: list[str] = []
        self._type_of: dict[int, int] = {}  # agent id -> type index
        self._known_ids = np.empty(0, dtype=np.int64)  # sorted; mirrors _type_of
        self._known_types = np.empty(0, dtype=np.int32)
        self._last_roster: tuple[np.ndarray, np.ndarray, list[str]] | None = None
        self.first_tick: int | None = None
        self.last_tick: int | None = None
        self.horizon: int | None = None
        self.finalized = False

    # -- bookkeeping -------------------------------------------------------

    def _ensure(self, extra: int) -> None:
        need = self._n + extra
        if need <= self._cap:
            return
        while self._cap < need:
            self._cap *= 2
        for name in ("_id_a", "_id_b", "_type_a", "_type_b", "_start", "_last",
                     "_duration", "_dist_sum", "_open"):
            old = getattr(self, name)
            grown = np.empty(self._cap, dtype=old.dtype)
            grown[: self._n] = old[: self._n]
            setattr(self, name, grown)

    def _register_agents(self, frame: TickFrame) -> None:
        # Hot path: most frames repeat the previous roster verbatim.
        prev = self._last_roster
        if (
            prev is not None
            and prev[2] is frame.type_names
            and np.array_equal(prev[0], frame.ids)
            and np.array_equal(prev[1], frame.type_ids)
        ):
            return
        # Frame-local type indices are remapped onto the ledger's own list.
        remap: dict[int, int] = {}
        for local, name in enumerate(frame.type_names):
            if name not in self.type_names:
                self.type_names.append(name)
            remap[local] = self.type_names.index(name)
        for agent_id, local in zip(frame.ids.tolist(), frame.type_ids.tolist()):
            if not (0 <= agent_id < _ID_LIMIT):
                raise ValueError(f"agent id {agent_id} outside supported range [0, 2^31)")
            t = remap[local]
            known = self._type_of.get(agent_id)
            if known is None:
                self._type_of[agent_id] = t
            elif known != t:
                raise ValueError(
                    f"agent {agent_id} changed type from "
                    f"{self.type_names[known]!r} to {self.type_names[t]!r}"
                )
        self._known_ids = np.fromiter(self._type_of.keys(), dtype=np.int64,
                                      count=len(self._type_of))
        srt = np.argsort(self._known_ids)
        self._known_ids = self._known_ids[srt]
        self._known_types = np.fromiter(self._type_of.values(), dtype=np.int32,
                                        count=len(self._type_of))[srt]
        self._last_roster = (frame.ids, frame.type_ids, frame.type_names)

    # -- the per-tick update -------------------------------------------------

    def observe(self, frame: TickFrame) -> None:
        """Fold one frame into the ledger (dense ticks required)."""
        if self.finalized:
            raise ValueError("ledger is finalized")
        if self.last_tick is None:
            self.first_tick = frame.tick
        elif frame.tick != self.last_tick + 1:
            raise NonMonotonicTickError(
                f"expected tick {self.last_tick + 1}, got {frame.tick}"
            )
        self.last_tick = frame.tick
        self._register_agents(frame)

        a, b, dist = pairs_within(frame.ids, frame.positions, self.config.effective_radius)
        keys = (a << 32) | b

        n_open = len(self._open_keys)
        if n_open:
            pos = np.searchsorted(self._open_keys, keys)
            pos_c = np.minimum(pos, n_open - 1)
            cont = self._open_keys[pos_c] == keys
            matched = np.zeros(n_open, dtype=bool)
            matched[pos_c[cont]] = True
            # pairs that left the radius: close, keep everything else as is
            closing = self._open_idx[~matched]
            self._open[closing] = False
            rec = self._open_idx[pos_c[cont]]
            self._duration[rec] += 1
            self._dist_sum[rec] += dist[cont]
            self._last[rec] = frame.tick
        else:
            cont = np.zeros(len(keys), dtype=bool)

        fresh = ~cont
        k = int(fresh.sum())
        if k:
            self._ensure(k)
            sl = slice(self._n, self._n + k)
            na, nb = a[fresh], b[fresh]
            self._id_a[sl] = na
            self._id_b[sl] = nb
            self._type_a[sl] = self._known_types[np.searchsorted(self._known_ids, na)]
            self._type_b[sl] = self._known_types[np.searchsorted(self._known_ids, nb)]
            self._start[sl] = frame.tick
            self._last[sl] = frame.tick
            self._duration[sl] = 1
            self._dist_sum[sl] = dist[fresh]
            self._open[sl] = True
            new_idx = np.arange(self._n, self._n + k, dtype=np.int64)
            self._n += k
        else:
            new_idx = np.empty(0, dtype=np.int64)

        # After the update the open set is exactly this frame's pair set.
        idx_all = np.empty(len(keys), dtype=np.int64)
        if n_open:
            idx_all[cont] = rec
        idx_all[fresh] = new_idx
        self._open_keys = keys
        self._open_idx = idx_all

    def finalize(self, last_tick: int) -> None:
        """Close every open record in place; safe to call more than once."""
        if self.last_tick is not None and last_tick < self.last_tick:
            raise ValueError(
                f"finalize tick {last_tick} precedes last observed tick {self.last_tick}"
            )
        self._open[: self._n] = False
        self._open_keys = np.empty(0, dtype=np.int64)
        self._open_idx = np.empty(0, dtype=np.int64)
        first = self.first_tick if self.first_tick is not None else 0
        self.horizon = last_tick - first + 1
        self.finalized = True

    # -- views ---------------------------------------------------------------

    @property
    def n_records(self) -> int:
        return self._n

    def columns(self) -> dict[str, np.ndarray]:
        """Trimmed read-only columns of every record logged so far."""
        n = self._n
        return {
            "id_a": self._id_a[:n],
            "id_b": self._id_b[:n],
            "type_a": self._type_a[:n],
            "type_b": self._type_b[:n],
            "start": self._start[:n],
            "last": self._last[:n],
            "duration": self._duration[:n],
            "dist_sum": self._dist_sum[:n],
            "open": self._open[:n],
        }

    def records(self) -> list[ContactRecord]:
        c = self.columns()
        return [
            ContactRecord(
                id_a=int(c["id_a"][i]),
                id_b=int(c["id_b"][i]),
                type_a=int(c["type_a"][i]),
                type_b=int(c["type_b"][i]),
                start_tick=int(c["start"][i]),
                last_updated_tick=int(c["last"][i]),
                duration=int(c["duration"][i]),
                mean_distance=float(c["dist_sum"][i] / c["duration"][i]),
                in_session=bool(c["open"][i]),
            )
            for i in range(self._n)
        ]

    def records_between(self, id_a: int, id_b: int) -> list[ContactRecord]:
        lo, hi = min(id_a, id_b), max(id_a, id_b)
        return [r for r in self.records() if r.id_a == lo and r.id_b == hi]

    def agents(self) -> dict[int, int]:
        """Agent id -> type index, in order of first appearance."""
        return dict(self._type_of)

    def observed_populations(self) -> dict[str, int]:
        counts = {name: 0 for name in self.type_names}
        for t in self._type_of.values():
            counts[self.type_names[t]] += 1
        return counts
