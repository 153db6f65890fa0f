import json
import subprocess
import sys
from itertools import combinations

import pytest

from kurepa.cli import main
from kurepa.core import SUCC, SURROGATE, canonical_model
from kurepa.io import dump_structure, dump_tree
from kurepa.treeops import PrunedTree


def model():
    return canonical_model(2, [SUCC], [1, 2], {"v1_0": "v0_0", "v1_1": "v0_0"}, [("v1_0", 0)], mode=SURROGATE)


@pytest.fixture
def good(tmp_path):
    p = tmp_path / "good.json"
    p.write_text(dump_structure(model()))
    return p


def test_validate_ok(good, capsys):
    assert main(["validate", str(good), "--sentence", "sigma-prime"]) == 0
    assert capsys.readouterr().out == ""


def test_validate_broken_f_witness(tmp_path, capsys):
    s = model()
    F = {t for t in s.F if t[0] != "l1"} | {("l1", p, "l0") for p in s.P}
    bad = tmp_path / "bad.json"
    bad.write_text(dump_structure(type(s)(P=s.P, L=s.L, V=s.V, T=s.T, F=frozenset(F), G=s.G, mode=s.mode)))
    assert main(["validate", str(bad)]) == 1
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(x.startswith("F-surjective\t") for x in lines)


def test_parse_error_exit_code(tmp_path, capsys):
    p = tmp_path / "broken.json"
    text = dump_structure(model()).replace('"kind": "succ"', '"kind": 7')
    p.write_text(text)
    assert main(["validate", str(p)]) == 2
    line = next(i for i, x in enumerate(text.splitlines(), 1) if '"kind": 7' in x)
    assert f"{p}:{line}: unknown level kind 7 (at 7)" in capsys.readouterr().err


def test_usage_errors_exit_two():
    for argv in (["frobnicate"], ["validate"], ["force", "--height", "x"]):
        with pytest.raises(SystemExit) as e:
            main(argv)
        assert e.value.code == 2


def test_compare(good, tmp_path, capsys):
    assert main(["compare", str(good), str(good)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["is_sub=true", "l_initial_segment=true", "levels_equal=true",
                   "order_preserved=true", "new_branch_count=0"]


def test_extend(good, tmp_path):
    out = tmp_path / "e.json"
    s = model()
    assert main(["extend", str(good), "--budget", str(s.size + 1), "-o", str(out)]) == 0
    assert main(["compare", str(good), str(out)]) == 0
    assert main(["extend", str(good), "--budget", str(s.size)]) == 1
    assert main(["extend", str(good), "--budget", "1"]) == 2


def test_amalgamate(good, tmp_path):
    out = tmp_path / "n.json"
    assert main(["amalgamate", "--base", str(good), "--left", str(good), "--right", str(good), "-o", str(out)]) == 0
    assert out.read_text() == good.read_text()


def test_witnesses(tmp_path):
    assert main(["witness", "--kind", "jep", "--size", "4", "-o", str(tmp_path / "j")]) == 0
    cert = json.loads((tmp_path / "j" / "certificate.json").read_text())
    assert cert["joint_extension_found"] is False and cert["budget"] == 20
    assert main(["witness", "--kind", "ap", "-o", str(tmp_path / "a")]) == 0
    cert = json.loads((tmp_path / "a" / "certificate.json").read_text())
    assert cert["amalgam_found"] is False and cert["control_amalgamates"] is True
    assert sorted(p.name for p in (tmp_path / "a").iterdir()) == ["certificate.json", "m0.json", "m1.json", "m2.json"]


def test_merge_and_branches(tmp_path, capsys):
    t = PrunedTree(levels=(("r",), ("a", "b")), parent={"a": "r", "b": "r"})
    p = tmp_path / "t.json"
    p.write_text(dump_tree(t))
    out = tmp_path / "m.json"
    assert main(["merge", str(p), str(p), "-o", str(out)]) == 0
    assert main(["branches", str(out)]) == 0
    assert capsys.readouterr().out.strip() == "4"


def test_force_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["force", "--height", "3", "--branches", "3", "--width", "4", "--seed", "7", "-o", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    run = json.loads(a.read_text())
    assert len(run["branches"]) == 3 and len(set(map(tuple, run["branches"].values()))) == 3
    assert main(["force", "--height", "2", "--branches", "8", "--width", "4"]) == 1


def test_cohen_restrict(tmp_path, capsys):
    conds = tmp_path / "c.json"
    conds.write_text(json.dumps([[[3, 0, 1], [5, 1, 0]], [[3, 2, 1]]]))
    h = [(3, 0, 1), (5, 1, 0), (3, 2, 1), (7, 0, 0)]
    filt = [list(map(list, s)) for k in range(len(h) + 1) for s in combinations(h, k)]
    g = tmp_path / "g.json"
    g.write_text(json.dumps(filt))
    assert main(["cohen-restrict", "--conds", str(conds), "--filter", str(g)]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["d"] == [3, 5] and obj["dstar"] == [[3, 0], [3, 2], [5, 1]]
    g.write_text(json.dumps([[[0, 0, 1]]]))
    assert main(["cohen-restrict", "--conds", str(conds), "--filter", str(g)]) == 2
    g.write_text('[\n  [[0, 0, "x"]]\n]')
    assert main(["cohen-restrict", "--conds", str(conds), "--filter", str(g)]) == 2


def test_spectrum(tmp_path):
    out = tmp_path / "r.json"
    assert main(["spectrum", "--max-size", "6", "--c", "2", "-o", str(out)]) == 0
    r = json.loads(out.read_text())
    assert r["trichotomy_ok"] and r["mm_sizes"]
    assert main(["spectrum", "--max-size", "6", "--c", "2", "--mode", "surrogate", "-o", str(out)]) == 1
    assert main(["spectrum", "--max-size", "13", "--c", "2"]) == 2


def test_module_entry_point_and_version():
    r = subprocess.run([sys.executable, "-m", "kurepa", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("kurepa ")


def test_inputs_are_not_modified(good):
    before = good.read_bytes()
    main(["validate", str(good)])
    main(["extend", str(good), "--budget", "20"])
    assert good.read_bytes() == before
