import json
import subprocess
import sys
from pathlib import Path

import pytest

from infmat.cli import main
from infmat.scenario import ScenarioError, parse_scenario, run_scenario


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc, indent=2))
    return path


SHIFT = {"ring": "Z", "derivation": {"kind": "inner", "operator": {"name": "shift"}}, "window": 6}
DIAG = {"ring": "Z", "derivation": {"kind": "inner", "operator": {"name": "diag", "formula": "i"}},
        "window": 6}
LIE_Z = {"ring": "Z", "derivation": {"kind": "lie", "ambient": "sl_inf",
                                     "derivation": {"kind": "inner", "operator": "shift"}}}
LIE_Z3 = {"ring": "Z/3", "window": 4, "reservoir": 9,
          "derivation": {"kind": "lie", "ambient": "sl_inf", "derivation": {
              "kind": "sum", "parts": [{"kind": "inner", "operator": "shift"},
                                       {"kind": "lift", "derivation": "zero"}]}}}
POLY = {"ring": "Z[t]", "window": 5, "derivation": {"kind": "sum", "parts": [
    {"kind": "inner", "operator": {"name": "finite", "entries": [[0, 1, "[1]"], [1, 2, "[2]"]]}},
    {"kind": "lift", "derivation": "d/dt"}]}}
M2 = {"ring": "M2(Z/3)", "window": 4, "derivation": {"kind": "sum", "parts": [
    {"kind": "inner", "operator": {"name": "shift", "scale": "[[1,1],[0,2]]"}},
    {"kind": "lift", "derivation": {"kind": "inner_ring", "element": "[[0,1],[0,0]]"}}]}}
ONES_RCF = {"ring": "Z", "ambient": "M_rcf", "derivation": {"kind": "inner", "operator": "ones_row"}}
ONES_FULL = {"ring": "Z", "ambient": "M_full", "window": 5,
             "derivation": {"kind": "inner", "operator": {"name": "ones_row", "row": 0}}}


@pytest.mark.parametrize("doc, code", [
    (SHIFT, 0), (DIAG, 0), (POLY, 0), (M2, 0), (LIE_Z3, 0), (ONES_FULL, 0),
    (LIE_Z, 3),
    (ONES_RCF, 1),
    ({"ring": "Q", "derivation": {"kind": "lift", "derivation": "zero"}}, 1),
    ({"ring": "Z", "derivation": {"kind": "lift", "derivation": "zero"}, "window": 0}, 1),
    ({"ring": "Z", "derivation": {"kind": "lift", "derivation": "zero"}, "colour": 1}, 1),
    ({"ring": "Z", "derivation": {"kind": "lift", "derivation": "d/dt"}}, 1),
    ("{not json", 1),
], ids=["shift", "diag", "poly", "m2", "lie-z3", "ones-full", "lie-z", "ones-rcf", "ring-q",
        "window-0", "unknown-key", "d/dt-on-z", "bad-json"])
def test_exit_codes(tmp_path, doc, code):
    path = write(tmp_path, "s.json", doc)
    got, target, message = run_scenario(path)
    assert got == code, message
    if code != 1:
        assert target.exists()
        assert json.loads(target.read_text())["status"] in message


def test_refuted_exit_code(tmp_path, monkeypatch):
    import infmat.scenario as sc
    from infmat import matrices as mx
    from infmat.derivations import Ambient, MatrixDerivation
    from infmat.rings import Integers

    Z = Integers()
    # transposition is additive but breaks the Leibniz rule
    box = MatrixDerivation(Z, Ambient.M_INF, lambda i, j, r: mx.unit(Z, j, i, r))
    monkeypatch.setattr(sc, "build_derivation", lambda *a, **k: box)
    code, target, _ = run_scenario(write(tmp_path, "s.json", SHIFT))
    assert code == 2
    assert json.loads(target.read_text())["status"] == "refuted"


def test_shift_report_contents(tmp_path):
    path = write(tmp_path, "shift.json", SHIFT)
    code, target, _ = run_scenario(path)
    assert code == 0 and target == tmp_path / "shift.report.json"
    doc = json.loads(target.read_text())
    assert doc["v_entries"] == [[k + 1, k, "1"] for k in range(5)]
    assert doc["residual"]["description"] == "zero"
    assert doc["tool"]["name"] == "infmat"
    assert doc["scenario"]["window"] == 6 and doc["scenario"]["ring"] == "Z"
    assert all(c == "pass" or c["status"] == "pass" for c in doc["checks"].values())


def test_diag_report_has_correction(tmp_path):
    code, target, _ = run_scenario(write(tmp_path, "d.json", DIAG))
    doc = json.loads(target.read_text())
    assert doc["correction"] == [[i, str(i)] for i in range(6)]
    assert doc["v_entries"] == []


def test_lie_gate_report(tmp_path):
    code, target, _ = run_scenario(write(tmp_path, "l.json", LIE_Z))
    doc = json.loads(target.read_text())
    assert code == 3 and doc["applicability"] == "half absent"


def test_reports_are_byte_identical(tmp_path):
    path = write(tmp_path, "p.json", POLY)
    _, target, _ = run_scenario(path, str(tmp_path / "a.json"))
    _, target2, _ = run_scenario(path, str(tmp_path / "b.json"))
    assert target.read_bytes() == target2.read_bytes()


def test_out_flag_and_output_key(tmp_path):
    doc = dict(SHIFT, output="custom.json")
    path = write(tmp_path, "s.json", doc)
    _, target, _ = run_scenario(path)
    assert target == tmp_path / "custom.json"
    _, target, _ = run_scenario(path, str(tmp_path / "flag.json"))
    assert target == tmp_path / "flag.json"


def test_parse_errors_are_line_anchored():
    text = '{\n  "ring": "Z",\n  "window": -2,\n  "derivation": {"kind": "lift", "derivation": "zero"}\n}'
    with pytest.raises(ScenarioError) as err:
        parse_scenario(text)
    assert err.value.line == 3
    assert err.value.anchored("x.json").startswith("x.json:3:")


def test_cli_run_and_demo(tmp_path, capsys):
    path = write(tmp_path, "s.json", SHIFT)
    assert main(["run", str(path), "--out", str(tmp_path / "r.json")]) == 0
    assert (tmp_path / "r.json").exists()
    assert main(["run", str(write(tmp_path, "q.json", {"ring": "Q", "derivation": {}}))]) == 1
    capsys.readouterr()
    assert main(["demo", "no-such-demo"]) == 1
    err = capsys.readouterr().err
    for name in ("diag-correction", "shift", "lemma3-failure", "lie-roundtrip"):
        assert name in err


def test_demo_outputs(capsys):
    assert main(["demo", "diag-correction"]) == 0
    out = capsys.readouterr().out
    assert "c(0) = 0, c(1) = 1, c(2) = 2, c(3) = 3" in out
    assert "residual u: zero" in out and "status: decomposed" in out
    assert main(["demo", "lemma3-failure"]) == 0
    out = capsys.readouterr().out
    assert "witness row 0" in out and "status: refuted" in out
    assert main(["demo", "shift"]) == 0
    assert "v equals the window of S: yes" in capsys.readouterr().out
    assert main(["demo", "lie-roundtrip"]) == 0
    out = capsys.readouterr().out
    assert "half absent" in out and out.count("status: decomposed") == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "infmat", "demo", "shift"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "v equals the window of S: yes" in proc.stdout


SHIPPED = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.mark.parametrize("name, code", [("shift", 0), ("diag_correction", 0), ("polynomial", 0),
                                        ("lie_m2", 0), ("lie_over_z", 3)])
def test_shipped_scenarios(tmp_path, name, code):
    got, _, message = run_scenario(SHIPPED / f"{name}.json", str(tmp_path / "r.json"))
    assert got == code, message
