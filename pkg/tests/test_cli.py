import json

from c1rect.cli import main
from c1rect.study import CSV_COLUMNS, parse_csv


def test_study_table_output(capsys):
    code = main(["study", "--family", "p-enriched", "--k", "4", "--levels", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert "dim V_h" in out
    assert out.strip().splitlines()[-1].split()[-1] == "48"


def test_study_csv_output(capsys):
    code = main(["study", "--family", "q-bfs", "--k", "4", "--levels", "3",
                 "--format", "csv"])
    out = capsys.readouterr().out
    assert code == 0
    rows = parse_csv(out)
    assert [r.dim for r in rows] == [25, 64, 196]


def test_study_json_to_file(tmp_path):
    target = tmp_path / "report.json"
    code = main(["study", "--family", "p-enriched", "--k", "5", "--levels", "2",
                 "--format", "json", "--out", str(target)])
    assert code == 0
    payload = json.loads(target.read_text())
    assert payload["config"]["k"] == 5
    assert [r["dim"] for r in payload["rows"]] == [28, 72]


def test_study_solver_flag(capsys):
    code = main(["study", "--family", "p-enriched", "--k", "4", "--levels", "2",
                 "--solver", "cg", "--tol", "1e-12", "--format", "json"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["meta"]["levels"][1]["method"] == "cg"


def test_verify_text(capsys):
    code = main(["verify", "--family", "p-enriched", "--k", "4", "--level", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS duality_residual" in out
    assert "FAIL" not in out


def test_verify_json(capsys):
    code = main(["verify", "--family", "q-bfs", "--k", "5", "--level", "1",
                 "--format", "json"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    names = {c["name"] for c in payload}
    assert {"duality_residual", "unisolvency_rcond", "dimension_count",
            "space_reproduction", "quadrature_exactness", "c1_jump_relative"} <= names


def test_csv_columns_constant():
    assert CSV_COLUMNS == ("level", "n", "dim", "l2_err", "l2_order",
                           "h2_err", "h2_order")
