import importlib.util
import json
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def load(name):
    spec = importlib.util.spec_from_file_location(name, ROOT / "scripts" / f"{name}.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def test_push_search_script(capsys):
    code = load("push_search").main(["--trials", "3", "--circle", "6"])
    out = json.loads(capsys.readouterr().out)
    assert code in (0, 3) and out["k"] == 4 and out["trials"] == 3


def test_ratio_search_script(capsys):
    code = load("ratio_search").main(["--space", str(ROOT / "data" / "multiray3.json"), "--start", "0:2,1:2",
                                      "--length", "3"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0 and out["within_bound"] and out["sequences"] == sum(7**i for i in range(4))
    code = load("ratio_search").main(["--start", "0,1", "--length", "6", "--budget", "10"])
    assert code == 4


def test_census_script_budget(capsys, tmp_path):
    out = tmp_path / "census.json"
    code = load("census").main(["--checkpoint", str(tmp_path / "ck"), "--out", str(out), "--max-states", "2"])
    assert code == 4
    summary = json.loads(out.read_text())
    assert summary["processed"] == 2 and not summary["complete"]
