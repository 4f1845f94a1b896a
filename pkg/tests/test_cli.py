import json
import subprocess
import sys

import pytest

from fibgen.catalogue import Workspace, category_to_json, parse_category
from fibgen.classify import MUTATIONS
from fibgen.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_validate_file_and_expression(tmp_path, capsys):
    path = tmp_path / "iso.json"
    path.write_text(json.dumps(category_to_json(parse_category("walkingIso"))))
    assert run(capsys, "validate", str(path))[0] == 0
    assert run(capsys, "validate", "fam:deloopZ2:1")[0] == 0


def test_validate_rejects_bad_table(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"objects": 1, "morphisms": [{"src": 0, "tgt": 0}] * 2,
                                "identities": [0], "comp": [[1, 1], [1, 1]]}))
    code, _, err = run(capsys, "validate", str(path))
    assert code == 1 and "identity" in err


@pytest.mark.parametrize("argv", [
    ["classify", "nosuch"],
    ["classify", "externalize:deloopZ2", "99"],
    ["classify", "deloopZ2"],
    ["build", "fam:finset_skel:9:1"],
    ["search", "--max-cat-morphisms", "9"],
    ["search", "--bases", "bogus"],
])
def test_input_errors_exit_1(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_classify_json(capsys):
    code, doc = run_json(capsys, "classify", "externalize:walkingIso@finset_skel:2")
    assert code == 0
    assert doc["flags"]["split"] is True and doc["flags"]["skeletal"] is False
    assert len(doc["witnesses"]["skeletal"]["baseMaps"]) == 2


def test_classify_all_objects(capsys):
    code, doc = run_json(capsys, "classify", "fam:deloopZ2:1", "all")
    assert code == 0
    rows = doc["reports"]
    assert len(rows) > 1


def test_workspace_round_trip(tmp_path, capsys):
    ws = tmp_path / "ws.json"
    assert run(capsys, "build", "externalize:deloopZ2", "--name", "D", "--workspace", str(ws))[0] == 0
    assert "D" in Workspace(str(ws))
    code, doc = run_json(capsys, "classify", "D", "T", "--workspace", str(ws))
    assert code == 0 and doc["flags"]["skeletal"] and not doc["flags"]["gaunt"]
    assert run(capsys, "classify", "E", "--workspace", str(ws))[0] == 1


def test_search_zero_bounds(capsys):
    code, doc = run_json(capsys, "search", "--zero")
    assert code == 0 and doc["objectsChecked"] == 0
    assert all(r["example"] is None for r in doc["separations"])


def test_suite_subset_passes(capsys):
    code, doc = run_json(capsys, "paper-examples", "--only", "split-not-skeletal", "delooping")
    assert code == 0 and doc["passed"] and len(doc["checks"]) == 2


def test_mutation_makes_delooping_fail(capsys):
    code, doc = run_json(capsys, "paper-examples", "--only", "delooping", "--mutate", "gaunt")
    assert code == 3
    assert not doc["checks"][0]["passed"]
    assert not MUTATIONS


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fibgen", "validate", "walkingIso"],
                         capture_output=True, text=True)
    assert res.returncode == 0
