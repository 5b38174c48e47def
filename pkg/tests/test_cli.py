import csv
import io
import json

import pytest

from presidential.cli import main


def csv_rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fourier_example(capsys):
    code, out, _ = run(capsys, "fourier", "--k", "4", "--a", "2", "--tmax", "3", "--oracle")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["k"] == 4
    rows = doc["result"]["rows"]
    assert rows[0]["set"] == "P" and rows[0]["exact"] == "3/4"
    assert doc["result"]["oracle_all_agree"] is True


def test_hplot_row_count(capsys):
    code, out, _ = run(capsys, "hplot", "--h", "cubic", "--from", "-1", "--to", "1.5", "--step", "0.01")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config:")
    rows = csv_rows(out)
    assert len(rows) == 251
    assert float(rows[0]["Delta"]) == -1.0 and float(rows[-1]["Delta"]) == 1.5
    assert float(rows[100]["h"]) == pytest.approx(1.0)


def test_certify_writes_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "certify", "--k", "10", "--a", "6", "--h", "cubic", "--samples", "50", "--seed", "1",
                     "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert "min_vertex_value" in doc["result"]
    assert doc["config"]["seed"] == 1


def test_outputs_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        run(capsys, "certify", "--k", "12", "--a", "8", "--samples", "10", "--seed", "3", "--out", str(path))
    assert a.read_bytes() == b.read_bytes()


def test_exit_codes(capsys):
    assert run(capsys, "fourier", "--k", "10", "--a", "5")[0] == 2          # parity
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "fourier", "--k", "10", "--a", "6", "--bogus")[0] == 2
    assert run(capsys, "round", "check-h", "--h", "cubic", "--delta0", "1")[0] == 1
    code, out, _ = run(capsys, "nopairwise", "--k", "12", "--a", "10", "--m", "3")
    assert code == 1
    assert json.loads(out)["result"]["monarchy_check"]["ok"] is True


def test_csv_flattening(capsys):
    code, out, _ = run(capsys, "predicate", "info", "--k", "10", "--a", "6", "--format", "csv")
    assert code == 0
    rows = csv_rows(out)
    assert rows[0]["delta"] == "3/5"
    code, out, _ = run(capsys, "certify", "--k", "10", "--a", "6", "--format", "csv")
    header = list(csv_rows(out)[0])
    assert "argmin_vertex.x1" in header and "delta_bounds.min" in header


def test_predicate_normalize(capsys):
    code, out, _ = run(capsys, "predicate", "normalize", "--k", "30", "--delta", "1/2")
    assert code == 0 and json.loads(out)["result"]["a"] == 16


def test_custom_h_and_eval(capsys):
    code, out, _ = run(capsys, "round", "eval", "--k", "10", "--a", "6", "--h", "custom", "--coeffs", "3,-3,1")
    assert code == 0
    rows = json.loads(out)["result"]["rows"]
    assert min(r["V_exact"] for r in rows if r["x1"] == 1 and r["t"] == 2) == "-61175/4032"
    assert run(capsys, "round", "eval", "--k", "10", "--a", "6", "--h", "custom")[0] == 2


def test_instance_roundtrip(tmp_path, capsys):
    path = tmp_path / "inst.json"
    code, _, _ = run(capsys, "instance", "gen", "--k", "10", "--a", "6", "--n-vars", "30", "--n-clauses", "50",
                     "--seed", "2", "--out", str(path))
    assert code == 0
    doc = json.loads(path.read_text())["result"]
    (tmp_path / "plain.json").write_text(json.dumps(doc))
    code, out, _ = run(capsys, "instance", "eval", "--file", str(tmp_path / "plain.json"), "--h", "cubic")
    assert code == 0
    rep = json.loads(out)["result"]
    assert rep["evaluated"] == 50 and rep["planted_satisfied_fraction"] == 1.0


def test_nopairwise_feasible(capsys):
    code, out, _ = run(capsys, "nopairwise", "--k", "30", "--a", "20", "--m", "3", "--trials", "10")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["zero_expectation"]["all_zero"] is True
    assert "table_sign_variant" in res


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "--delta0", "1/2", "--h", "cubic", "--k-min", "8", "--k-max", "12")
    assert code == 0
    rows = csv_rows(out)
    assert rows and set(rows[0]) >= {"k", "a", "min_vertex_value", "status"}
    assert any(ln.startswith("# summary:") and "k_star" in ln for ln in out.splitlines())
