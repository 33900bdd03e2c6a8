import csv
import io
import json

import pytest

from harness.reporting import CheckResult, VerificationReport, emit_csv, format_cell, render_csv
from utils.error_handler import OutputError


def test_float_cells_round_trip():
    for value in (0.1, 1.0 / 3.0, 2.5e-300, 123456789.123):
        text = format_cell(value)
        assert float(text) == value


def test_cell_types():
    assert format_cell(3) == "3"
    assert format_cell(True) == "true"
    assert format_cell("base") == "base"


def test_empty_table_has_header():
    assert render_csv(["n", "p", "cumulative"], []) == "n,p,cumulative\r\n"


def test_rows_parse_back():
    text = render_csv(["n", "p"], [[0, 0.25], [1, 1.0 / 3.0]])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["n", "p"]
    assert float(rows[2][1]) == 1.0 / 3.0


def test_row_width_is_checked():
    with pytest.raises(ValueError):
        render_csv(["a", "b"], [[1]])


def test_bare_rows_without_header():
    assert render_csv(None, [[0.5, 3, 1e-17]]) == "0.5,3,1.0000000000000001e-17\r\n"
    with pytest.raises(ValueError):
        render_csv(None, [[1, 2], [3]])


def test_emit_to_file(tmp_path):
    path = tmp_path / "out.csv"
    emit_csv(["x"], [[1.5]], path)
    assert path.read_bytes() == b"x\r\n1.5\r\n"


def test_emit_to_stdout(capsys):
    emit_csv(["x"], [[2]])
    assert capsys.readouterr().out == "x\r\n2\r\n"


def test_unwritable_path(tmp_path):
    with pytest.raises(OutputError) as info:
        emit_csv(["x"], [], tmp_path / "missing" / "out.csv")
    assert info.value.exit_code == 5


def test_check_result_constructors():
    assert CheckResult.at_most("a", 0.5, 1.0).passed
    assert not CheckResult.at_most("a", float("nan"), 1.0).passed
    assert CheckResult.at_least("b", 0.2, 1e-3).passed
    assert not CheckResult.at_least("b", 1e-4, 1e-3).passed


def test_overall_ignores_diagnostics():
    report = VerificationReport(suite="x", seed=1, checks=[
        CheckResult.at_most("gating", 0.1, 1.0),
        CheckResult.at_most("diagnostic", 5.0, 1.0, gating=False),
    ])
    assert report.overall
    report = VerificationReport(suite="x", seed=1, checks=[CheckResult.at_most("gating", 2.0, 1.0)])
    assert not report.overall
    assert [c.name for c in report.failed()] == ["gating"]


def test_report_json_is_sorted():
    report = VerificationReport(suite="kernels", seed=42, checks=[CheckResult.at_most("c", 0.0, 1.0)])
    data = json.loads(report.to_json())
    assert data["overall"] is True
    assert list(data) == sorted(data)
    assert report.to_json() == report.to_json()
