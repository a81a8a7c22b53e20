import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from rashba_green.cli import RunConfig, Sweep, main, parse_complex, run as run_config
from rashba_green.greens import PhysicalParams, g1

PI = math.pi

CVALUE = {"type": "object", "required": ["re", "im"], "additionalProperties": False,
          "properties": {"re": {"type": "number"}, "im": {"type": "number"}}}
RESULT = {"anyOf": [{"type": "null"}, {
    "type": "object", "required": ["value", "representation", "terms", "error_estimate"],
    "properties": {"value": CVALUE, "representation": {"type": "string"},
                   "terms": {"type": "integer", "minimum": 0},
                   "error_estimate": {"type": "number", "minimum": 0},
                   "slow_convergence": {"type": "boolean"}}}]}
PARAMS = {"type": "object", "required": ["alpha", "beta", "zeta"],
          "properties": {"alpha": {"type": "number"}, "beta": {"type": "number"}, "zeta": CVALUE}}
EVAL_SCHEMA = {
    "type": "object",
    "required": ["command", "params", "point", "r", "g1", "g2", "dp_g1", "dm_g1", "matrix"],
    "properties": {
        "command": {"const": "eval"}, "params": PARAMS,
        "point": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
        "r": {"type": "number"},
        "g1": RESULT, "g2": RESULT, "g2_ren": RESULT, "dp_g1": RESULT, "dm_g1": RESULT,
        "matrix": {"anyOf": [{"type": "null"}, {
            "type": "object", "required": ["g11", "g12", "g21", "g22"],
            "additionalProperties": CVALUE}]},
    },
}
VERIFY_SCHEMA = {
    "type": "object", "required": ["checks", "max_rel_deviation", "passed"],
    "properties": {"params": PARAMS, "checks": {"type": "array", "minItems": 2, "items": {
        "type": "object", "required": ["check", "series", "reference", "rel_deviation"],
        "properties": {"series": CVALUE, "reference": CVALUE, "rel_deviation": {"type": "number"}}}},
        "passed": {"type": "boolean"}},
}


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_complex():
    assert parse_complex("-4+0i") == -4
    assert parse_complex("-2-3i") == -2 - 3j
    assert parse_complex("1.5e-1+2e1i") == 0.15 + 20j
    assert parse_complex("-3") == -3
    assert parse_complex("2i") == 2j
    assert parse_complex("-2+1j") == -2 + 1j
    for bad in ("", "abc", "1 + 2i", "1+2x"):
        with pytest.raises(ValueError):
            parse_complex(bad)


def test_sweep_parse():
    s = Sweep.parse("r:0.1:2:20")
    assert (s.variable, s.start, s.stop, s.count) == ("r", 0.1, 2.0, 20)
    with pytest.raises(ValueError):
        Sweep.parse("gamma:0:1:3")
    with pytest.raises(ValueError):
        Sweep.parse("r:0:1")


def test_eval_free_case(capsys):
    code, out, _ = run(["eval", "--alpha", "0", "--beta", "0", "--zeta", "-4+0i", "--x", "0,0,1",
                        "--format", "json"], capsys)
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, EVAL_SCHEMA)
    assert rep["g1"]["value"]["re"] == pytest.approx(math.exp(-2) / (16 * PI), rel=1e-14)
    assert rep["g1"]["value"]["im"] == 0


def test_eval_alpha0_offdiagonals_zero(capsys):
    code, out, _ = run(["eval", "--alpha", "0", "--beta", "1", "--zeta", "-3", "--x", "0.3,0.4,0.5",
                        "--format", "json"], capsys)
    assert code == 0
    m = json.loads(out)["matrix"]
    assert m["g12"] == {"re": 0.0, "im": 0.0} and m["g21"] == {"re": 0.0, "im": 0.0}


def test_eval_general_schema_and_text(capsys):
    args = ["eval", "--alpha", "1", "--beta", "2", "--zeta", "-5", "--x", "0.3,0.2,0.4"]
    code, out, _ = run(args + ["--format", "json"], capsys)
    assert code == 0
    jsonschema.validate(json.loads(out), EVAL_SCHEMA)
    code, out, _ = run(args, capsys)
    assert code == 0 and "G1" in out and "g21" in out


def test_eval_origin(capsys):
    code, out, _ = run(["eval", "--alpha", "1", "--beta", "2", "--zeta", "-5", "--x", "0,0,0",
                        "--format", "json"], capsys)
    rep = json.loads(out)
    jsonschema.validate(rep, EVAL_SCHEMA)
    assert code == 0 and rep["g2"] is None and rep["g2_ren"] is not None


def test_forced_rep_c_invalid(capsys):
    code, _, err = run(["eval", "--alpha", "1", "--beta", "1", "--zeta", "0.5i", "--rep", "c"], capsys)
    assert code == 3 and "NoValidRegion" in err


def test_invalid_zeta_exit(capsys):
    for cmd in ("eval", "verify", "table"):
        extra = ["--sweep", "r:0.1:1:3"] if cmd == "table" else []
        code, out, err = run([cmd, "--alpha", "1", "--beta", "1", "--zeta", "-0.5"] + extra, capsys)
        assert code == 2 and out == "" and "InvalidZeta" in err


def test_no_convergence_exit(capsys):
    code, _, err = run(["eval", "--alpha", "1", "--beta", "2", "--zeta", "-5", "--x", "0,0,3",
                        "--max-terms", "4"], capsys)
    assert code == 4 and "NoConvergence" in err


def test_region(capsys):
    code, out, _ = run(["region", "--alpha", "1", "--beta", "1", "--zeta", "-1.5", "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["sigma"] == 1 and rep["conditions"]["a"] and rep["valid_zeta"]
    assert set(rep["v"]) == {"Xp1", "Xp2", "Xp3"}
    code, out, _ = run(["region", "--alpha", "1", "--beta", "1", "--zeta", "-0.5"], capsys)
    assert code == 0 and "invalid" in out


def test_table_free_case(tmp_path, capsys):
    path = tmp_path / "t.csv"
    code, _, _ = run(["table", "--alpha", "0", "--beta", "0", "--zeta", "-4", "--sweep", "r:0.1:2:20",
                      "--format", "csv", "--output", str(path)], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert len(rows) == 20
    for row in rows:
        r = float(row["value"])
        assert float(row["g1_re"]) == pytest.approx(math.exp(-2 * r) / (16 * PI), rel=1e-13)


def test_table_empty_sweep(tmp_path, capsys):
    path = tmp_path / "t.csv"
    code, _, _ = run(["table", "--alpha", "0", "--beta", "0", "--zeta", "-4", "--sweep", "r:0.1:2:0",
                      "--format", "csv", "--output", str(path)], capsys)
    assert code == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("index,variable,value")


def test_table_failed_rows_are_tagged(capsys):
    code, out, _ = run(["table", "--alpha", "1", "--beta", "1", "--zeta", "-1.5", "--x", "0.3,0.1,0.2",
                        "--sweep", "alpha:0:3:4", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 4
    assert rows[0]["error"] == "" and rows[-1]["error"] == "InvalidZeta"


def test_table_representation_changes():
    # with alpha > 0 throughout, the automatic choice of series still switches
    buf = io.StringIO()
    cfg = RunConfig("table", 1.0, 2.0, -5 + 0j, point=(0.0, 0.0, 0.5),
                    sweep=Sweep("alpha", 0.1, 1.0, 6), fmt="csv")
    assert run_config(cfg, stdout=buf) == 0
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert all(row["error"] == "" for row in rows)
    assert len({row["representation"] for row in rows}) > 1


def test_table_csv_round_trip(capsys):
    code, out, _ = run(["table", "--alpha", "1", "--beta", "2", "--zeta", "-5+1i", "--x", "0,0,1",
                        "--sweep", "r:0.2:1.0:3", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    for row in rows:
        v = g1(float(row["value"]), PhysicalParams(1, 2, -5 + 1j))
        assert complex(float(row["g1_re"]), float(row["g1_im"])) == v


def test_output_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"t{k}.json"
        run(["table", "--alpha", "0.5", "--beta", "1", "--zeta", "-4+2i", "--sweep", "r:0.2:1.5:6",
             "--format", "json", "--threads", str(1 + 2 * k), "--output", str(path)], capsys)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rows = json.loads(outs[0])["rows"]
    assert [r["index"] for r in rows] == list(range(6))


def test_verify(capsys):
    code, out, _ = run(["verify", "--alpha", "1", "--beta", "2", "--zeta", "-5", "--x", "0,0,0.5",
                        "--format", "json"], capsys)
    rep = json.loads(out)
    jsonschema.validate(rep, VERIFY_SCHEMA)
    assert code == 0 and rep["passed"] and rep["max_rel_deviation"] < 1e-6
    assert len(rep["checks"]) == 4


def test_verify_alpha0_uses_closed_form(capsys):
    code, out, _ = run(["verify", "--alpha", "0", "--beta", "1", "--zeta", "-3", "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert any("closed form" in c["check"] for c in rep["checks"])


def test_verify_failure_exit(capsys):
    code, _, _ = run(["verify", "--alpha", "1", "--beta", "2", "--zeta", "-5", "--x", "0,0,0.5",
                      "--check-tol", "1e-30"], capsys)
    assert code == 5


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rashba_green", "eval", "--alpha", "0", "--beta", "0",
                           "--zeta", "-4+0i", "--x", "0,0,1", "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    g1_line = next(line for line in proc.stdout.splitlines() if line.startswith("g1,"))
    assert float(g1_line.split(",")[1]) == pytest.approx(math.exp(-2) / (16 * PI), rel=1e-15)
