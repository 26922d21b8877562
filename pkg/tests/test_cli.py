"""CLI integration tests against golden outputs in tests/golden.

Set ``UIPID_REGEN_GOLDEN=1`` to rewrite the golden files.
"""
import json
import math
import os
import subprocess
import sys

import pytest

from uipid.cli import main

from conftest import DATA, GOLDEN

REGEN = os.environ.get("UIPID_REGEN_GOLDEN") == "1"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def same(a, b, rel=1e-9, abs_=1e-12):
    if isinstance(a, dict):
        return isinstance(b, dict) and a.keys() == b.keys() and all(same(a[k], b[k], rel, abs_) for k in a)
    if isinstance(a, list):
        return isinstance(b, list) and len(a) == len(b) and all(same(x, y, rel, abs_) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)
    return a == b


def golden(name, out):
    path = GOLDEN / name
    if REGEN:
        path.parent.mkdir(exist_ok=True)
        path.write_text(out)
    expected = path.read_text()
    if name.endswith(".json"):
        assert same(json.loads(out), json.loads(expected))
    else:
        assert out == expected


def test_compute_blockwise(capsys):
    code, out, err = run(capsys, "compute", DATA / "blockwise.json")
    assert code == 0
    obj = json.loads(out)
    assert obj["uiBits"] == 0.0 and obj["path"] == "CiLpX"
    assert "path: CiLpX" in err
    golden("compute_blockwise.json", out)


def test_compute_xor_decompose(capsys):
    code, out, _ = run(capsys, "compute", DATA / "xor.json", "--decompose")
    assert code == 0
    dec = json.loads(out)["decomposition"]
    assert dec["synergy"] == pytest.approx(1.0) and dec["shared"] == pytest.approx(0.0, abs=1e-12)
    golden("compute_xor_decompose.json", out)


def test_compute_csv_input_matches_json(capsys):
    _, a, _ = run(capsys, "compute", DATA / "xor.json")
    _, b, _ = run(capsys, "compute", DATA / "xor.csv")
    assert a == b


def test_compute_negative_entry(capsys):
    code, out, err = run(capsys, "compute", DATA / "neg.json")
    assert code == 2 and out == ""
    assert "NegativeEntry" in err and "(1, 0, 0)" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "compute", DATA / "nope.json")
    assert code == 2 and err.startswith("error:")


def test_unnormalized(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text('{"shape": [1, 1, 2], "p": [0.5, 0.4]}')
    code, _, err = run(capsys, "compute", f)
    assert code == 2 and "NotNormalized" in err


def test_decompose_text(capsys):
    code, out, _ = run(capsys, "--format", "text", "decompose", DATA / "xor.json")
    assert code == 0
    golden("decompose_xor.txt", out)


def test_diagnose_uniform(capsys):
    code, out, _ = run(capsys, "diagnose", DATA / "uniform222.json")
    assert code == 0
    assert json.loads(out)["doubleIndependenceNonUnique"]["raised"]
    golden("diagnose_uniform.json", out)


def test_diagnose_xor(capsys):
    code, out, _ = run(capsys, "diagnose", DATA / "xor.json")
    obj = json.loads(out)
    assert code == 0
    assert obj["doubleIndependenceNonUnique"]["raised"] and not obj["blockwiseNonUnique"]["raised"]
    golden("diagnose_xor.json", out)


def test_diagnose_singleton(capsys):
    code, out, _ = run(capsys, "diagnose", DATA / "binary_singleton.json")
    obj = json.loads(out)
    assert code == 0 and obj["path"] == "SingletonDomain" and "note" in obj
    solve_obj = json.loads(run(capsys, "compute", DATA / "binary_singleton.json")[1])
    assert solve_obj["ciFlags"] == {"TXgivenY": False, "TYgivenX": False}
    golden("diagnose_singleton.json", out)


def test_diagnose_blockwise(capsys):
    code, out, _ = run(capsys, "diagnose", DATA / "blockwise.json")
    assert code == 0 and json.loads(out)["blockwiseNonUnique"]["raised"]
    golden("diagnose_blockwise.json", out)


def test_viz223(capsys):
    code, out, _ = run(capsys, "viz223", DATA / "two_two_three.json")
    obj = json.loads(out)
    assert code == 0 and len(obj["factors"]) == 2
    golden("viz223.json", out)
    code, out, _ = run(capsys, "--format", "csv", "viz223", DATA / "two_two_three.json")
    assert out.startswith("t,kind,index,g_t00,g_t01\n")


def test_viz223_wrong_shape(capsys):
    code, _, err = run(capsys, "viz223", DATA / "xor.json")
    assert code == 2 and "InvalidShape" in err


def test_stats_small(capsys, tmp_path):
    csv_path, json_path = tmp_path / "r.csv", tmp_path / "r.json"
    code, out, _ = run(capsys, "--seed", "1", "stats", "--shape", "2,2,2", "--shape", "2,2,3", "-n", "100",
                       "--csv", csv_path, "--json", json_path)
    assert code == 0
    assert json.loads(out) == json.loads(json_path.read_text())
    assert len(csv_path.read_text().splitlines()) == 3
    golden("stats_small.json", out)


def test_stats_guard(capsys):
    code, _, err = run(capsys, "stats", "--shape", "2,50,50", "-n", "1")
    assert code == 3 and "guard" in err


def test_stats_bad_shape(capsys):
    code, _, _ = run(capsys, "stats", "--shape", "2,x", "-n", "1")
    assert code == 2


@pytest.mark.slow
def test_stats_interior_two_by_two(capsys):
    code, out, _ = run(capsys, "stats", "--shape", "2,2,2", "-n", "10000", "--seed", "1")
    r = json.loads(out)["experiments"][0]
    assert code == 0 and 74.6 <= r["interiorFraction"] <= 80.6
    golden("stats_222_10000.json", out)


@pytest.mark.slow
def test_stats_unique_two_by_two_by_five(capsys):
    code, out, _ = run(capsys, "stats", "--shape", "2,2,5", "-n", "10000")
    r = json.loads(out)["experiments"][0]
    assert code == 0 and 0.9 <= r["uniqueFraction"] <= 4.5
    golden("stats_225_10000.json", out)


@pytest.mark.slow
def test_stats_interior_four_by_four(capsys):
    code, out, _ = run(capsys, "stats", "--shape", "2,4,4", "-n", "1000")
    r = json.loads(out)["experiments"][0]
    assert code == 0
    golden("stats_244_1000.json", out)
    assert 52 <= r["interiorFraction"] <= 62


def test_global_flags_after_subcommand(capsys):
    a = run(capsys, "--seed", "3", "--restarts", "2", "compute", DATA / "ternary.json")[1]
    b = run(capsys, "compute", DATA / "ternary.json", "--seed", "3", "--restarts", "2")[1]
    assert a == b


def test_tol_interior_flag(capsys):
    out = run(capsys, "--tol-interior", "0.2", "compute", DATA / "ternary.json")[1]
    assert json.loads(out)["location"]["kind"] == "Boundary"


def test_byte_identical_runs(capsys):
    outs = {run(capsys, "compute", DATA / "ternary.json", "--decompose")[1] for _ in range(3)}
    assert len(outs) == 1


def test_output_file(tmp_path, capsys):
    f = tmp_path / "o.json"
    code, out, _ = run(capsys, "decompose", DATA / "xor.json", "-o", f)
    assert code == 0 and out == "" and json.loads(f.read_text())["synergy"] == pytest.approx(1.0)


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "uipid.cli", "--format", "text", "compute", str(DATA / "blockwise.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "CiLpX" in proc.stdout
