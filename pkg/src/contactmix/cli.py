"""Command line front end.

``contactmix run`` simulates a scenario and writes the contact-matrix
bundle; ``contactmix ingest-trace`` replays a recorded position trace
through the same contact pipeline.  Exit codes: 0 success, 1 invalid input
(scenario, trace or usage), 2 a fault during simulation (for example an
unreachable location), 3 an I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any

from .contacts import ContactConfig, ContactLedger, NonMonotonicTickError
from .engine import SimConfig, SimulationFault, run
from .frames import TraceFormatError, read_frames, write_frames
from .report import write_bundle
from .scenario import ScenarioError, load_scenario, round_half_up

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAULT = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # usage problems are invalid input, not a runtime fault
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(ValueError):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--radius-m", type=float, default=2.0,
                   help="contact radius in meters (boundary inclusive)")
    p.add_argument("--min-duration-ticks", type=int, default=1,
                   help="drop contacts shorter than this many ticks at reporting time")
    p.add_argument("--chunk-ticks", type=int, default=900,
                   help="exposure chunk length in ticks")
    p.add_argument("--base-p", type=float, default=0.1,
                   help="per-chunk transmission probability")
    p.add_argument("--out", required=True, help="output directory for the bundle")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="contactmix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write contact matrices")
    p_run.add_argument("--scenario", required=True, help="scenario JSON path")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--ticks", type=int, required=True, help="simulation horizon in ticks")
    p_run.add_argument("--tick-length-s", type=float, default=None,
                       help="override the scenario's tick length")
    p_run.add_argument("--export-frames", action="store_true",
                       help="also write the per-tick position trace (frames.csv)")
    _add_common(p_run)

    p_ing = sub.add_parser("ingest-trace", help="replay a position trace into contact matrices")
    p_ing.add_argument("--trace", required=True, help="trace CSV path")
    p_ing.add_argument("--tick-length-s", type=float, default=1.0)
    p_ing.add_argument("--populations", default=None,
                       help="override type populations, e.g. 'patient=12,nurse=4'")
    _add_common(p_ing)
    return parser


def _contact_config(args: argparse.Namespace, tick_length: float) -> ContactConfig:
    return ContactConfig(
        effective_radius=args.radius_m,
        tick_length=tick_length,
        min_duration=args.min_duration_ticks,
        chunk_length=args.chunk_ticks,
    )


def _bucket_length(tick_length: float) -> int:
    return max(1, round_half_up(3600.0 / tick_length))


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    tick_length = args.tick_length_s if args.tick_length_s is not None else scenario.tick_length
    config = SimConfig(ticks=args.ticks, seed=args.seed, tick_length=tick_length)
    contact_cfg = _contact_config(args, tick_length)
    ledger = ContactLedger(contact_cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    frames_fh = None
    try:
        if args.export_frames:
            frames_fh = (out / "frames.csv").open("w", encoding="utf-8")
            frames_fh.write("tick,agent_id,type_name,x_m,y_m\n")

        def observer(frame):
            ledger.observe(frame)
            if frames_fh is not None:
                write_frames(frames_fh, [frame], header=False)

        summary = run(scenario, config, observer)
    finally:
        if frames_fh is not None:
            frames_fh.close()

    ledger.finalize(args.ticks - 1)
    populations = scenario.populations
    manifest: dict[str, Any] = {
        "command": "run",
        "scenario": args.scenario,
        "seed": args.seed,
        "ticks": args.ticks,
        "tick_length_s": tick_length,
        "radius_m": args.radius_m,
        "min_duration_ticks": args.min_duration_ticks,
        "chunk_ticks": args.chunk_ticks,
        "base_p": args.base_p,
        "bucket_ticks": _bucket_length(tick_length),
        "export_frames": bool(args.export_frames),
        "populations": populations,
        "agents": summary.agents,
        "arrivals": summary.arrivals,
        "departures": summary.departures,
    }
    write_bundle(out, ledger, populations, manifest, args.base_p, _bucket_length(tick_length))
    return EXIT_OK


def _parse_populations(spec: str | None) -> dict[str, int]:
    if not spec:
        return {}
    out: dict[str, int] = {}
    for item in spec.split(","):
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not name:
            raise _UsageError(f"bad --populations entry {item!r}; expected name=count")
        try:
            count = int(value)
        except ValueError:
            raise _UsageError(f"bad --populations count in {item!r}") from None
        if count < 0:
            raise _UsageError(f"population for {name!r} must be >= 0")
        out[name] = count
    return out


def cmd_ingest(args: argparse.Namespace) -> int:
    contact_cfg = _contact_config(args, args.tick_length_s)
    ledger = ContactLedger(contact_cfg)
    last_tick = -1
    with open(args.trace, "r", encoding="utf-8") as fh:
        for frame in read_frames(fh):
            ledger.observe(frame)
            last_tick = frame.tick
    ledger.finalize(last_tick)

    populations = ledger.observed_populations()
    override = _parse_populations(args.populations)
    for name, count in override.items():
        observed = populations.get(name, 0)
        if count < observed:
            raise _UsageError(
                f"--populations gives {count} for {name!r} but the trace shows {observed}"
            )
        populations[name] = count

    manifest: dict[str, Any] = {
        "command": "ingest-trace",
        "trace": args.trace,
        "ticks": last_tick + 1,
        "tick_length_s": args.tick_length_s,
        "radius_m": args.radius_m,
        "min_duration_ticks": args.min_duration_ticks,
        "chunk_ticks": args.chunk_ticks,
        "base_p": args.base_p,
        "bucket_ticks": _bucket_length(args.tick_length_s),
        "populations": populations,
    }
    write_bundle(args.out, ledger, populations, manifest, args.base_p,
                 _bucket_length(args.tick_length_s))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return cmd_run(args)
        return cmd_ingest(args)
    except (_UsageError, ScenarioError, TraceFormatError, NonMonotonicTickError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except SimulationFault as e:
        print(f"fault: {e}", file=sys.stderr)
        return EXIT_FAULT
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
