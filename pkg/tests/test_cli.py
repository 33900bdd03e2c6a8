import csv
import io
import json
from dataclasses import replace

import pytest

import app

BASE = {"k": 1, "d": 1, "rates": [[1.0]], "variant": "base", "t": [1.0]}


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_mlf_prints_one_bare_row(capsys):
    assert app.main(["mlf", "--alpha", "1", "--x", "1", "--quiet"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 1
    value, terms_used, tail_bound = rows[0]
    assert float(value) == pytest.approx(2.718281828459045, rel=1e-12)
    assert int(terms_used) > 1
    assert 0.0 <= float(tail_bound) < 1e-12


def test_mlf_table_mode(capsys):
    assert app.main(["mlf", "--alpha", "1", "--x=0,1", "--table", "--quiet"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["x", "value", "terms_used", "tail_bound"]
    assert float(rows[1][1]) == pytest.approx(1.0)
    assert float(rows[2][1]) == pytest.approx(2.718281828459045, rel=1e-12)


def test_pmf_to_file(tmp_path):
    out = tmp_path / "pmf.csv"
    assert app.main(["pmf", "--n-max", "5", "--method", "direct", "--out", str(out), "--quiet"]) == 0
    rows = _rows(out.read_text(encoding="ascii"))
    assert rows[0] == ["n", "p", "cumulative"]
    assert [int(r[0]) for r in rows[1:]] == list(range(6))
    assert all(0.0 <= float(r[1]) <= 1.0 for r in rows[1:])


def test_pmf_variant_override(config_file, tmp_path):
    out = tmp_path / "pmf.csv"
    path = config_file(dict(BASE, alpha=[0.6]))
    assert app.main(["pmf", "--config", str(path), "--variant", "time-mv", "--n-max", "3", "--out", str(out)]) == 0
    assert len(_rows(out.read_text(encoding="ascii"))) == 5


def test_residual_rows(config_file, capsys):
    path = config_file(BASE)
    assert app.main(["residual", "--config", str(path), "--n", "0,1", "--quiet"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert [r[:3] for r in rows[1:]] == [["base", "0", "0"], ["base", "1", "0"]]
    assert all(float(r[3]) < 1e-6 for r in rows[1:])


def test_missing_field_exits_with_validation_code(config_file, capsys):
    path = config_file({"k": 1, "d": 1, "variant": "base", "t": [1.0]})
    assert app.main(["pmf", "--config", str(path), "--quiet"]) == 2
    assert "rates" in capsys.readouterr().err


def test_unknown_suite_exits_with_validation_code(config_file):
    path = config_file(BASE)
    assert app.main(["verify", "--config", str(path), "--suite", "nonsense", "--quiet"]) == 2


def test_unwritable_output(tmp_path):
    out = tmp_path / "missing" / "pmf.csv"
    assert app.main(["pmf", "--n-max", "2", "--out", str(out), "--quiet"]) == 5


def test_verify_writes_report(config_file, tmp_path):
    out = tmp_path / "report.json"
    path = config_file(BASE)
    assert app.main(["verify", "--config", str(path), "--suite", "reductions", "--seed", "3",
                     "--out", str(out), "--quiet"]) == 0
    report = json.loads(out.read_text(encoding="ascii"))
    assert report["overall"] is True
    assert report["seed"] == 3
    assert report["suite"] == "reductions"


def test_invalid_environment_settings(monkeypatch, capsys):
    broken = replace(app.config, sampling=replace(app.config.sampling, workers=0))
    monkeypatch.setattr(app, "config", broken)
    assert app.main(["mlf", "--alpha", "1", "--x=0"]) == 2
    assert "GCP_WORKERS" in capsys.readouterr().err


@pytest.mark.slow
def test_verify_all_is_byte_identical(config_file, tmp_path):
    path = config_file({"k": 2, "d": 2, "rates": [[1.0, 2.0], [3.0, 4.0]], "variant": "time", "t": [1.0, 1.0],
                        "alpha": [0.5, 0.8], "replicates": 5_000})
    outputs, codes = [], []
    for run, workers in enumerate(("1", "3")):
        out = tmp_path / f"report_{run}.json"
        codes.append(app.main(["verify", "--config", str(path), "--suite", "all", "--seed", "42",
                               "--workers", workers, "--out", str(out), "--quiet"]))
        outputs.append(out.read_bytes())
    assert codes[0] == codes[1]
    assert outputs[0] == outputs[1]
    assert json.loads(outputs[0])["suite"] == "all"
