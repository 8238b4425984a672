import csv
import filecmp
import json
import subprocess
import sys

import pytest

from contactmix.aggregate import matrix_from_csv
from contactmix.cli import EXIT_FAULT, EXIT_INVALID, EXIT_IO, EXIT_OK, main

from conftest import GOLDEN_IDS

MATRIX_FILES = [
    "agent_count.csv",
    "agent_duration.csv",
    "agent_distance.csv",
    "agent_by_type_count.csv",
    "agent_by_type_duration.csv",
    "agent_by_type_distance.csv",
    "type_count.csv",
    "type_duration.csv",
    "type_distance.csv",
    "effective_chunks.csv",
    "transmission_probability.csv",
    "hourly_series.csv",
]


@pytest.fixture
def clinic(tmp_path):
    # a small scenario file of our own so tests do not depend on shipped data
    doc = {
        "map": {
            "cell_size_m": 1.0,
            "width": 10,
            "height": 6,
            "blocked": [],
            "locations": {
                "desk": {"cells": [[1, 1]], "capacity": 1},
                "room": {"cells": [[8, 4]], "capacity": None},
            },
        },
        "agent_types": [
            {
                "name": "staff",
                "population": 1,
                "workflow": [
                    {"kind": "goto", "location": "desk"},
                    {"kind": "dwell", "duration": {"kind": "constant", "value": 40}},
                    {"kind": "depart"},
                ],
            },
            {
                "name": "visitor",
                "population": 3,
                "arrival": {"start": 0, "interval": 4},
                "workflow": [
                    {"kind": "goto", "location": "desk"},
                    {"kind": "goto", "location": "room"},
                    {"kind": "dwell", "duration": {"kind": "constant", "value": 10}},
                    {"kind": "depart"},
                ],
            },
        ],
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def run_cli(*argv):
    return main([str(a) for a in argv])


def read_cell(path, row, col):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    j = header.index(col)
    for r in rows[1:]:
        if r[0] == row:
            return r[j]
    raise KeyError(row)


def test_run_writes_full_bundle(clinic, tmp_path):
    out = tmp_path / "out"
    code = run_cli("run", "--scenario", clinic, "--seed", 1, "--ticks", 120,
                   "--out", out, "--export-frames")
    assert code == EXIT_OK
    for name in MATRIX_FILES + ["manifest.json", "bundle.json", "frames.csv"]:
        assert (out / name).is_file(), name
    with open(out / "frames.csv", encoding="utf-8") as fh:
        assert fh.readline().strip() == "tick,agent_id,type_name,x_m,y_m"


def test_run_manifest_records_effective_parameters(clinic, tmp_path):
    out = tmp_path / "out"
    run_cli("run", "--scenario", clinic, "--seed", 7, "--ticks", 50,
            "--radius-m", 1.5, "--chunk-ticks", 30, "--base-p", 0.2,
            "--min-duration-ticks", 2, "--out", out)
    m = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert m["command"] == "run"
    assert m["seed"] == 7 and m["ticks"] == 50
    assert m["radius_m"] == 1.5 and m["chunk_ticks"] == 30
    assert m["base_p"] == 0.2 and m["min_duration_ticks"] == 2
    assert m["populations"] == {"staff": 1, "visitor": 3}
    assert m["bucket_ticks"] == 3600  # 1 s ticks
    assert m["export_frames"] is False
    assert m["agents"] == 4 and m["arrivals"] == 4


def test_run_is_deterministic_per_seed(clinic, tmp_path):
    outs = []
    for name, seed in (("a", 9), ("b", 9), ("c", 10)):
        out = tmp_path / name
        run_cli("run", "--scenario", clinic, "--seed", seed, "--ticks", 100,
                "--out", out, "--export-frames")
        outs.append(out)
    a, b, c = outs
    for name in MATRIX_FILES + ["manifest.json", "bundle.json", "frames.csv"]:
        assert filecmp.cmp(a / name, b / name, shallow=False), name
    assert not filecmp.cmp(a / "frames.csv", c / "frames.csv", shallow=False)


def test_run_then_ingest_reproduces_matrices(clinic, tmp_path):
    sim_out = tmp_path / "sim"
    run_cli("run", "--scenario", clinic, "--seed", 4, "--ticks", 150,
            "--out", sim_out, "--export-frames")
    ing_out = tmp_path / "ing"
    code = run_cli("ingest-trace", "--trace", sim_out / "frames.csv",
                   "--tick-length-s", 1.0, "--out", ing_out)
    assert code == EXIT_OK
    for name in MATRIX_FILES:
        assert filecmp.cmp(sim_out / name, ing_out / name, shallow=False), name


def test_zero_population_scenario(tmp_path):
    doc = {
        "map": {
            "cell_size_m": 1.0, "width": 4, "height": 4, "blocked": [],
            "locations": {"spot": {"cells": [[1, 1]], "capacity": None}},
        },
        "agent_types": [{
            "name": "ghost", "population": 0,
            "workflow": [{"kind": "goto", "location": "spot"}, {"kind": "depart"}],
        }],
    }
    path = tmp_path / "empty.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    out = tmp_path / "out"
    assert run_cli("run", "--scenario", path, "--ticks", 10, "--out", out) == EXIT_OK
    rows, cols, values, _ = matrix_from_csv(
        (out / "agent_count.csv").read_text(encoding="utf-8"))
    assert rows == [] and cols == [] and values.size == 0
    # the declared type still appears, with an undefined diagonal (n < 2)
    assert read_cell(out / "type_count.csv", "ghost", "ghost") == ""


def test_unreachable_location_exits_2(tmp_path, capsys):
    doc = {
        "map": {
            "cell_size_m": 1.0, "width": 8, "height": 8,
            "blocked": [[3, 3], [3, 4], [3, 5], [4, 3], [4, 5], [5, 3], [5, 4], [5, 5]],
            "locations": {
                "lobby": {"cells": [[0, 0]], "capacity": None},
                "vault": {"cells": [[4, 4]], "capacity": None},
            },
        },
        "agent_types": [{
            "name": "walker", "population": 1,
            "workflow": [
                {"kind": "goto", "location": "lobby"},
                {"kind": "goto", "location": "vault"},
            ],
        }],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code = run_cli("run", "--scenario", path, "--ticks", 20, "--out", tmp_path / "o")
    assert code == EXIT_FAULT
    err = capsys.readouterr().err
    assert "walker" in err and "vault" in err


def test_malformed_scenario_exits_1(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"map": {}}', encoding="utf-8")
    code = run_cli("run", "--scenario", path, "--ticks", 5, "--out", tmp_path / "o")
    assert code == EXIT_INVALID
    assert "error:" in capsys.readouterr().err


def test_missing_scenario_file_exits_3(tmp_path):
    code = run_cli("run", "--scenario", tmp_path / "nope.json", "--ticks", 5,
                   "--out", tmp_path / "o")
    assert code == EXIT_IO


def test_ingest_golden_trace_matches_hand_values(golden_trace, golden_expect, tmp_path):
    out = tmp_path / "out"
    code = run_cli("ingest-trace", "--trace", golden_trace, "--out", out)
    assert code == EXIT_OK
    for (a, b), want in golden_expect.type_duration.items():
        got = read_cell(out / "type_duration.csv", a, b)
        if want is None:
            assert got == ""
        else:
            # cells are %.6g, so compare at that precision
            assert float(got) == pytest.approx(want, rel=1e-5, abs=1e-5)
    host_col = str(GOLDEN_IDS["H"])
    assert float(read_cell(out / "agent_duration.csv", str(GOLDEN_IDS["G2"]),
                           host_col)) == 3.0


def test_ingest_population_override_extends_universe(golden_trace, tmp_path):
    out = tmp_path / "out"
    code = run_cli("ingest-trace", "--trace", golden_trace,
                   "--populations", "blue=5,ghost=2", "--out", out)
    assert code == EXIT_OK
    m = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert m["populations"]["blue"] == 5
    assert m["populations"]["ghost"] == 2
    # never-observed type appears with all-zero interaction cells
    assert float(read_cell(out / "type_count.csv", "ghost", "host")) == 0.0
    assert float(read_cell(out / "type_count.csv", "ghost", "ghost")) == 0.0
    # larger denominator dilutes the per-pair rate: the host's two records
    # with blue agents average over 1 * 5 pairs instead of 1 * 3
    assert float(read_cell(out / "type_count.csv", "host", "blue")) == \
        pytest.approx(0.4, abs=1e-9)


def test_ingest_population_below_observed_exits_1(golden_trace, tmp_path, capsys):
    code = run_cli("ingest-trace", "--trace", golden_trace,
                   "--populations", "blue=2", "--out", tmp_path / "o")
    assert code == EXIT_INVALID
    assert "blue" in capsys.readouterr().err


def test_ingest_bad_populations_syntax_exits_1(golden_trace, tmp_path, capsys):
    for spec in ("blue", "blue=abc", "=3", "blue=-1"):
        code = run_cli("ingest-trace", "--trace", golden_trace,
                       "--populations", spec, "--out", tmp_path / "o")
        assert code == EXIT_INVALID, spec
        capsys.readouterr()


def test_ingest_tick_jump_names_line(tmp_path, capsys):
    path = tmp_path / "gap.csv"
    path.write_text(
        "tick,agent_id,type_name,x_m,y_m\n"
        "0,1,red,0.0,0.0\n"
        "2,1,red,1.0,0.0\n",
        encoding="utf-8",
    )
    code = run_cli("ingest-trace", "--trace", path, "--out", tmp_path / "o")
    assert code == EXIT_INVALID
    assert "line 3" in capsys.readouterr().err


def test_ingest_missing_trace_exits_3(tmp_path):
    code = run_cli("ingest-trace", "--trace", tmp_path / "nope.csv",
                   "--out", tmp_path / "o")
    assert code == EXIT_IO


def test_usage_errors_exit_1(tmp_path, capsys):
    assert run_cli("run", "--out", tmp_path / "o") == EXIT_INVALID  # no --scenario/--ticks
    assert run_cli("frobnicate") == EXIT_INVALID
    capsys.readouterr()


def test_console_entry_point(clinic, tmp_path):
    out = tmp_path / "out"
    proc = subprocess.run(
        ["contactmix", "run", "--scenario", str(clinic), "--ticks", "30",
         "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "type_count.csv").is_file()


def test_help_exits_zero():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
