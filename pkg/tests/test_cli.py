import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from kserver import formats
from kserver import metric as M
from kserver import workfn as W
from kserver.cli import main, parse_tie
from kserver.wfa import run_wfa

DATA = Path(__file__).resolve().parents[1] / "data"
CIRCLE = str(DATA / "circle8.json")
SEQ = str(DATA / "counterexample.seq")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_counterexample_default_is_ok(capsys):
    code, out, _ = run(capsys, "counterexample")
    assert code == 0
    assert "Phi(w_t) = 44" in out and "laziness gap = -1" in out and out.rstrip().endswith("OK")


def test_counterexample_json(capsys):
    code, out, _ = run(capsys, "counterexample", "--format", "json", "--scale", "4")
    data = json.loads(out)
    assert code == 0 and data["ok"]
    assert data["C_t"] == ["1", "5", "7"] and data["phi_t+1"] == "45" and data["laziness_gap"] == "-1"


def test_counterexample_other_tie_reports_mismatch(capsys):
    code, out, _ = run(capsys, "counterexample", "--tie", "lexicographic")
    assert code == 3 and "MISMATCH" in out


def test_counterexample_rejects_odd_scale(capsys):
    code, _, err = run(capsys, "counterexample", "--scale", "3")
    assert code == 2 and "even scale" in err


def test_simulate_counterexample_sequence(capsys):
    code, out, _ = run(capsys, "simulate", "--space", CIRCLE, "--sequence", SEQ, "--start", "1,6,7",
                       "--tie", "prefer_server:6", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["valid"]
    assert data["steps"][-1]["pinned"] == "2"
    assert data["steps"][-2]["config"] == ["1", "5", "7"]
    # the dump reloads and replays to the same trajectory
    space, start, reqs, tie = formats.trajectory_from_dict(data)
    traj = run_wfa(space, start, reqs, parse_tie(f"{tie}:6", space))
    assert [list(map(space.label, c)) for c in traj.configs[1:]] == [s["config"] for s in data["steps"]]


def test_simulate_plain_requests_text(capsys, tmp_path):
    seq = tmp_path / "reqs.seq"
    seq.write_text("r 0:2\nr 1:2  # far leaf\n\nr c\n")
    code, out, _ = run(capsys, "simulate", "--space", DATA / "multiray3.json", "--sequence", seq, "--start", "c,2:1")
    assert code == 0
    assert "WFA cost" in out and out.count("r=") == 3


def test_simulate_parse_errors(capsys, tmp_path):
    bad = tmp_path / "bad.seq"
    bad.write_text("r 1\nmove 2\n")
    code, _, err = run(capsys, "simulate", "--space", CIRCLE, "--sequence", bad, "--start", "1,6,7")
    assert code == 2 and ":2:" in err and "unknown event" in err
    bad.write_text("r 9\n")
    code, _, err = run(capsys, "simulate", "--space", CIRCLE, "--sequence", bad, "--start", "1,6,7")
    assert code == 2 and ":1:" in err
    bad.write_text("taxi a c\n")
    code, _, err = run(capsys, "simulate", "--space", DATA / "tree5.json", "--sequence", bad, "--start", "a,b")
    assert code == 2 and "circle" in err
    code, _, err = run(capsys, "simulate", "--space", CIRCLE, "--start", "1,6", "--tie", "prefer_server")
    assert code == 2


def test_bad_metric_file(capsys, tmp_path):
    f = tmp_path / "m.json"
    f.write_text('{"kind": "circle", "num_points": 16,\n "circumference": }')
    code, _, err = run(capsys, "reconstruct-tree", "--space", f)
    assert code == 2 and ":2:" in err
    f.write_text('{"kind": "blob"}')
    assert run(capsys, "reconstruct-tree", "--space", f)[0] == 2
    f.write_text('{"kind": "general", "matrix": [[0, 1], [2, 0]]}')
    assert run(capsys, "reconstruct-tree", "--space", f)[0] == 2


def test_non_positive_budget_is_rejected(capsys):
    assert run(capsys, "enumerate", "--max-states", "0")[0] == 2


def test_enumerate_partial(capsys, tmp_path):
    ck = tmp_path / "ck"
    code, out, _ = run(capsys, "enumerate", "--max-states", "3", "--checkpoint", ck, "--format", "json")
    data = json.loads(out)
    assert code == 4 and data["processed"] == 3 and not data["complete"]
    code, out, _ = run(capsys, "enumerate", "--max-states", "5", "--checkpoint", ck, "--resume", "--format", "json")
    assert code == 4 and json.loads(out)["processed"] == 5


def test_enumerate_server_only_completes(capsys):
    code, out, _ = run(capsys, "enumerate", "--server-only", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["complete"] and data["violations"] == []


def test_verify_suite(capsys):
    code, out, _ = run(capsys, "verify", "duality", "--cases", "6", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["passed"] == 6 and data["failed"] == 0


def test_verify_table(capsys, tmp_path):
    space = formats.load_space(CIRCLE)
    w = W.update(W.cone([2, 12, 14], space), 8)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(W.dump(w)))
    assert run(capsys, "verify", "lipschitz", "--space", CIRCLE, "--table", good)[0] == 0
    vals = w.values.copy()
    vals[0] -= 100
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(W.dump(W.WorkFunction(space, 3, vals))))
    code, out, _ = run(capsys, "verify", "lipschitz", "--space", CIRCLE, "--table", bad)
    assert code == 3 and "FAIL" in out


def test_potential_command(capsys):
    code, out, _ = run(capsys, "potential", "--space", CIRCLE, "--start", "1,6,7", "--sequence", SEQ,
                       "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["value_units"] == "45"
    code, out, _ = run(capsys, "potential", "--space", CIRCLE, "--start", "1,6,7", "--formulation", "lazy_k3")
    assert code == 0 and "= 18" in out


def test_potential_needs_extension(capsys):
    tree = DATA / "tree5.json"
    code, _, err = run(capsys, "potential", "--space", tree, "--start", "a,e")
    assert code == 2 and "antipodal" in err
    code, out, _ = run(capsys, "potential", "--space", tree, "--start", "a,e", "--extend")
    assert code == 0
    code, _, err = run(capsys, "potential", "--space", tree, "--start", "a,e", "--extend", "--formulation", "evader")
    assert code == 2 and "n <= 9" in err


def test_reconstruct_tree(capsys):
    code, out, _ = run(capsys, "reconstruct-tree", "--space", DATA / "tree5.json", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["quasiconcave"]
    assert sorted(Fraction(e[2]) for e in data["edges"]) == [1, 1, Fraction(3, 2), 2]
    code, out, _ = run(capsys, "reconstruct-tree", "--space", DATA / "square.json")
    assert code == 3 and "witness" in out


def test_sequence_round_trip():
    space = formats.load_space(CIRCLE)
    events = formats.parse_sequence(SEQ, space)
    assert len(events) == 7 and events[0].is_taxi and events[0].line == 2
    again = formats.parse_sequence(formats.format_sequence(events, space), space)
    assert [e.points for e in again] == [e.points for e in events]


@pytest.mark.parametrize("path", sorted(DATA.glob("*.json")))
def test_space_round_trip(path):
    space = formats.load_space(path)
    back = formats.space_from_dict(json.loads(json.dumps(formats.space_to_dict(space))))
    assert np.array_equal(back.dist, space.dist) and back.labels == space.labels


def test_parse_tie():
    sp = M.build_circle(8, 8)
    assert parse_tie("prefer_server:3", sp).server == 3
    for bad in ("prefer_server", "lexicographic:2", "coin"):
        with pytest.raises(formats.ParseError):
            parse_tie(bad, sp)
