"""Watch two groups squeeze through a doorway, then see it in the matrix.

A wall splits a hall in two, with a one-cell doorway.  Reds live west and
commute east; blues do the opposite.  The social-force model makes them
brake, bunch up and slip past each other at the door; the A* router is what
sends every trip through it.  The ASCII snapshots show the jam forming, and
the final matrix shows how much contact the bottleneck manufactured.
"""

import json

import numpy as np

from contactmix import (
    ContactConfig,
    ContactLedger,
    SimConfig,
    build_matrices,
    parse_scenario,
    run,
)

WIDTH, HEIGHT, DOOR_Y = 20, 9, 4
doc = {
    "map": {
        "cell_size_m": 1.0, "width": WIDTH, "height": HEIGHT,
        "blocked": [[10, y] for y in range(HEIGHT) if y != DOOR_Y],
        "locations": {
            "west": {"cells": [[1, y] for y in range(2, 7)], "capacity": None},
            "east": {"cells": [[18, y] for y in range(2, 7)], "capacity": None},
        },
    },
    "agent_types": [
        {
            "name": name, "population": 8,
            "arrival": {"start": 0, "interval": 1},
            "workflow": [
                {"kind": "goto", "location": home},
                {"kind": "goto", "location": away},
                {"kind": "dwell", "duration": {"kind": "constant", "value": 10}},
                {"kind": "goto", "location": home},
                {"kind": "depart"},
            ],
        }
        for name, home, away in (("red", "west", "east"), ("blue", "east", "west"))
    ],
}

scenario = parse_scenario(json.dumps(doc))
ledger = ContactLedger(ContactConfig(effective_radius=2.0))
snapshots = {}

def observer(frame):
    ledger.observe(frame)
    if frame.tick in (2, 8, 14, 20):
        snapshots[frame.tick] = (frame.positions.copy(), frame.type_ids.copy())

TICKS = 80
summary = run(scenario, SimConfig(ticks=TICKS, seed=11), observer)
ledger.finalize(TICKS - 1)

blocked = {tuple(c) for c in doc["map"]["blocked"]}
for tick, (positions, type_ids) in sorted(snapshots.items()):
    grid = [["#" if (x, y) in blocked else "." for x in range(WIDTH)]
            for y in range(HEIGHT)]
    for (x, y), t in zip(positions, type_ids):
        cx, cy = int(x), int(y)
        grid[cy][cx] = "rb"[t] if grid[cy][cx] in ".rb" else "*"
    print(f"tick {tick}:")
    for row in reversed(grid):  # y axis points up
        print("  " + "".join(row))
    print()

print(f"{summary.departures} of {summary.arrivals} agents made the round trip")
matrices = build_matrices(ledger, scenario.populations)
print("\nmean in-contact ticks per type pair:")
print(matrices["type_duration"].to_csv())
cross = matrices["type_duration"].cell("blue", "red")
same = matrices["type_duration"].cell("red", "red")
print(f"door crossings put each red near each blue for ~{cross:.0f} ticks "
      f"(vs {same:.0f} among reds walking the same way)")
