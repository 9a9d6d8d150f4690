import contextlib
import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from crossdiff.cli import main
from regen_golden import GOLDEN, expand, invoke, normalize_report

MANIFEST = json.loads((GOLDEN / "manifest.json").read_text())
REPORT_SCHEMA = json.loads(
    (Path(__file__).resolve().parents[1] / "src" / "crossdiff" / "schemas" / "report.schema.json").read_text())


def _close(a, b, path="$"):
    """Structural equality with a relative float tolerance for cross-platform roundoff."""
    if isinstance(a, float) or isinstance(b, float):
        assert isinstance(a, (int, float)) and isinstance(b, (int, float)), path
        if math.isnan(a) or math.isnan(b):
            assert math.isnan(a) and math.isnan(b), path
        else:
            assert a == pytest.approx(b, rel=1e-9, abs=1e-12), path
    elif isinstance(a, dict):
        assert isinstance(b, dict) and set(a) == set(b), f"{path}: keys {set(a) ^ set(b)}"
        for k in a:
            _close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{path}[{i}]")
    else:
        assert a == b, path


@pytest.mark.parametrize("case", MANIFEST, ids=lambda c: c["name"])
def test_golden(case, tmp_path):
    code, stdout, stderr, out = invoke(expand(case["argv"]), tmp_path)
    assert code == case["exit_code"], stderr
    golden = case.get("golden")
    if out and Path(out).exists() and code in (0, 2, 3):
        # stdout is exactly the path of the written report or CSV
        assert stdout == out + "\n"
    else:
        assert stdout == ""
    if code != 0:
        assert "crossdiff" in stderr
    if golden is None:
        return
    if golden.endswith(".json"):
        got = normalize_report(Path(out).read_text())
        _close(got, json.loads((GOLDEN / golden).read_text()))
    else:
        got = list(csv.reader(open(out)))
        want = list(csv.reader(open(GOLDEN / golden)))
        assert got[0] == want[0] and len(got) == len(want)
        for r, s in zip(got[1:], want[1:]):
            _close([float(x) if x else None for x in r], [float(x) if x else None for x in s])


def test_every_exit_code_is_covered():
    seen = {(c["argv"][0], c["exit_code"]) for c in MANIFEST}
    assert {("analyze", k) for k in (0, 1, 2, 3)} <= seen
    assert {("factorize", k) for k in (0, 1, 2)} <= seen
    assert {("simulate", k) for k in (0, 1, 4, 5)} <= seen


@pytest.mark.parametrize("name", ["analyze_skt_detailed_balance", "analyze_skt_cyclic"])
def test_reports_are_deterministic(name, tmp_path):
    case = next(c for c in MANIFEST if c["name"] == name)
    texts = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        _, _, _, out = invoke(expand(case["argv"]), d)
        doc = json.loads(Path(out).read_text())
        doc.pop("timestamp")
        texts.append(json.dumps(doc, sort_keys=True))
    assert texts[0] == texts[1]


@pytest.mark.parametrize("case", [c for c in MANIFEST if c["argv"][0] == "analyze" and "golden" in c],
                         ids=lambda c: c["name"])
def test_reports_match_schema(case):
    doc = json.loads((GOLDEN / case["golden"]).read_text())
    doc["timestamp"] = "2026-01-01T00:00:00+00:00"
    jsonschema.validate(doc, REPORT_SCHEMA)


def test_report_contents():
    doc = json.loads((GOLDEN / "analyze_skt_detailed_balance.json").read_text())
    assert doc["entropy"]["selected"] == "boltzmann"
    assert doc["structure"]["aggregates"]["hA_pd"] == "pass"
    assert all(r["hA_pd"]["margin"] > 0 for r in doc["structure"]["records"])
    cyc = json.loads((GOLDEN / "analyze_skt_cyclic.json").read_text())
    assert cyc["flags"]["ne"] == "pass" and cyc["flags"]["detailed_balance"] == "infeasible"
    assert cyc["ellipticity"]["certificates"]["skt3_admissible_triples"] == [[3, 1, 2]]


def test_factorize_pd_fixture():
    doc = json.loads((GOLDEN / "factorize_upper_pd.json").read_text())
    assert doc["checks"]["a2_plus_transpose_minus_identity"] < 1e-12
    spd = json.loads((GOLDEN / "factorize_upper_spd.json").read_text())
    assert spd["checks"]["a1_min_eigenvalue"] > 0 and min(spd["checks"]["a2_eigenvalues"]) > 0


def test_factorize_prints_json_without_out():
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        assert main(["factorize", expand(["{fix}/matrices/upper.json"])[0]]) == 0
    assert json.loads(buf.getvalue())["kind"] == "PositiveDefinite"


def test_error_diagnostics_name_line_and_field(tmp_path):
    _, _, stderr, _ = invoke(expand(["analyze", "{fix}/specs/bad_negative.json"]), tmp_path)
    assert "line 6" in stderr and "params.a" in stderr


def test_simulate_reports_first_violating_step(tmp_path):
    case = next(c for c in MANIFEST if c["name"] == "simulate_wrong_entropy")
    _, _, stderr, out = invoke(expand(case["argv"]), tmp_path)
    assert "entropy increased at step" in stderr
    assert Path(out).exists()


def test_constant_state_csv_has_constant_entropy():
    rows = list(csv.DictReader(open(GOLDEN / "simulate_skt_constant_state.csv")))
    assert len({r["H"] for r in rows}) == 1


def test_module_entry_point(tmp_path):
    spec = expand(["{fix}/specs/fluid_not_elliptic.json"])[0]
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "crossdiff", "analyze", spec, "--samples", "5", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stdout.strip() == str(out)
