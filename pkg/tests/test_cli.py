import csv
import io
import json
import subprocess
import sys

import pytest

from pyramidlab.cli import EXIT_DEGENERATE, EXIT_GATE, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_l2_threshold(capsys):
    code, out = run(capsys, "l2-threshold", "--d", "16")
    doc = json.loads(out)
    assert code == EXIT_OK
    rec = doc["records"][0]
    assert rec["exponent"] == "-1/6" and rec["threshold"] == 16
    assert rec["threshold_condition"] == "d > 15"
    assert doc["schema"] == 1 and doc["seed"] == 0 and doc["d"] == 16
    assert "version" in doc and doc["wall_time"] is not None


def test_region_exclusion(capsys):
    code, out = run(capsys, "region", "--d", "16", "--hull", "sec10_S", "--point", "1/2,1/2,1/2")
    rec = json.loads(out)["records"][0]
    assert code == EXIT_OK
    assert rec["verdict"] == "excluded" and rec["witness"] == "10/3"
    assert rec["certificate"] == {"w": ["-1", "-1", "-1"], "w0": "23/20"}
    assert rec["lp_agrees_with_witness"]


def test_region_inside(capsys):
    code, out = run(capsys, "region", "--d", "16", "--hull", "sec10_Sprime")
    assert code == EXIT_OK
    assert json.loads(out)["records"][0]["verdict"] == "inside"


def test_multiplier_origin(capsys):
    code, out = run(capsys, "multiplier", "--point", "origin", "--samples", "500", "--deterministic")
    rec = json.loads(out)["records"][0]
    assert code == EXIT_OK
    assert rec["reduced"]["value"]["re"] == pytest.approx(1.0, abs=1e-9)
    assert rec["mc"]["value"]["re"] == 1.0
    assert rec["verdict"] == "PASS"


def test_multiplier_degenerate_exit_code(capsys):
    d = 4
    xi = [1, 0, 0, 0]
    delta = [0, 1, 0, 0]
    eta = [0, 2, 0, 0]
    point = ",".join(str(v) for v in xi + delta + eta)
    code, out = run(capsys, "multiplier", "--d", str(d), "--point", point, "--samples", "2000")
    rec = json.loads(out)["records"][0]
    assert code == EXIT_DEGENERATE
    assert "degenerate" in rec["reduced"]["refused"]
    assert "value" in rec["mc"]


def test_deterministic_output_is_byte_identical(capsys):
    argv = ["multiplier", "--d", "5", "--seed", "3", "--samples", "4000", "--deterministic"]
    a = run(capsys, *argv)
    b = run(capsys, *argv)
    assert a == b
    assert json.loads(a[1])["wall_time"] is None
    c = run(capsys, *argv[:-3], "--samples", "4000", "--threads", "2", "--deterministic")
    assert c == a


def test_seed_changes_output(capsys):
    _, a = run(capsys, "multiplier", "--seed", "1", "--samples", "2000", "--deterministic")
    _, b = run(capsys, "multiplier", "--seed", "2", "--samples", "2000", "--deterministic")
    assert a != b


def test_csv_output(capsys):
    code, out = run(capsys, "decay-scan", "--d", "5", "--seed", "4", "--deterministic")
    assert code in (EXIT_OK, EXIT_GATE)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["lambda"]) for r in rows] == [1, 2, 4, 8, 16, 32, 64]
    assert {"abs_m", "bound", "usable", "seed", "version", "wall_time"} <= set(rows[0])
    assert rows[0]["wall_time"] == ""


def test_csv_for_records(capsys):
    code, out = run(capsys, "l2-threshold", "--d", "15", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert rows[0]["exponent"] == "0" and rows[0]["summable"] == "False"


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out = run(capsys, "l2-threshold", "--out", str(target))
    assert code == EXIT_OK and out == ""
    assert json.loads(target.read_text())["command"] == "l2-threshold"


def test_partition_check(capsys):
    code, out = run(capsys, "partition-check", "--samples", "50", "--seed", "2")
    rec = json.loads(out)["records"][0]
    assert code == EXIT_OK
    assert rec["max_residual"]["phi"] <= 1e-12
    assert rec["max_residual"]["telescoping"] <= 1e-9


def test_operator_command(capsys):
    code, out = run(capsys, "operator", "--samples", "2000", "--points", "10")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["records"][0]["probability_bound_pass"] == 10
    assert len(doc["table"]) == 10


@pytest.mark.parametrize(
    "argv",
    [
        ["nonsense"],
        ["multiplier", "--d", "3"],
        ["multiplier", "--samples", "0"],
        ["multiplier", "--quad-nodes", "4"],
        ["multiplier", "--point", "1,2,3"],
        ["region", "--point", "1/2,x,1"],
        ["region", "--hull", "other"],
    ],
)
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == EXIT_USAGE


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "pyramidlab.cli", "l2-threshold", "--d", "16", "--deterministic"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert json.loads(out.stdout)["records"][0]["threshold"] == 16
