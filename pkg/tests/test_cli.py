import csv
import io
import json
import math

import pytest
import sympy as sp

from pydantic import ValidationError

from diracwg.cli import RunConfig, SeriesParameters, VerifyParameters, parse_list, parse_range, run
from diracwg.errors import ArgumentError


def read_csv(text):
    lines = text.splitlines()
    comments = [line for line in lines if line.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(line for line in lines if not line.startswith("#")))))
    return comments, rows


def test_parse_range():
    assert parse_range("-3:3:61")[30] == 0.0
    assert parse_range("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_range("2:5:1") == [2.0]
    with pytest.raises(ArgumentError):
        parse_range("0:1")
    with pytest.raises(ArgumentError):
        parse_range("0:1:0")


def test_parse_list():
    assert parse_list("0.2,0.1,0.05") == [0.2, 0.1, 0.05]
    with pytest.raises(ArgumentError):
        parse_list("0.2,abc")


def test_series_command(capsys):
    assert run(["series", "--order", "4"]) == 0
    comments, rows = read_csv(capsys.readouterr().out)
    assert comments[0].startswith("# config: ")
    assert json.loads(comments[0][len("# config: "):])["parameters"] == {"order": 4}

    (row,) = [row for row in rows if row["quantity"] == "nu1" and row["power"] == "4"]
    expected = -5120 / sp.pi**7 - 8 / sp.pi**3 + sp.Rational(1792, 3) / sp.pi**5
    assert sp.simplify(sp.sympify(row["exact"]) - expected) == 0
    assert float(row["value"]) == pytest.approx(float(expected), abs=1e-12)


def test_transverse_command(capsys):
    assert run(["transverse", "--mu-range", "-3:3:61", "--branch", "1"]) == 0
    _, rows = read_csv(capsys.readouterr().out)
    assert len(rows) == 61
    (origin,) = [row for row in rows if float(row["mu"]) == 0.0]
    assert float(origin["k"]) == pytest.approx(math.pi / 4, abs=1e-12)
    assert rows[0]["kind"] == "hyperbolic"
    assert rows[-1]["kind"] == "oscillatory"


def test_output_is_reproducible(capsys):
    run(["dispersion", "--mu", "0.2", "--xi-range", "-1:1:5", "--branches", "3"])
    first = capsys.readouterr().out
    run(["dispersion", "--mu", "0.2", "--xi-range", "-1:1:5", "--branches", "3"])
    assert capsys.readouterr().out == first
    _, rows = read_csv(first)
    assert len(rows) == 15


def test_json_output_to_file(tmp_path):
    path = tmp_path / "out" / "transverse.json"
    assert run(["transverse", "--mu-range", "0:1:3", "--format", "json", "--output", str(path)]) == 0
    document = json.loads(path.read_text())
    assert document["config"]["command"] == "transverse"
    assert [row["mu"] for row in document["rows"]] == [0.0, 0.5, 1.0]


def test_effective_command(capsys, geometry_dir):
    assert run(["effective", "--geom", str(geometry_dir / "circle1.json"), "--count", "3"]) == 0
    captured = capsys.readouterr()
    comments, rows = read_csv(captured.out)
    assert "# negative_count: 1" in comments
    assert "N = 1" in captured.err
    expected = sorted(((2 * math.pi * n + math.pi + 2) ** 2 - 4) / (2 * math.pi) ** 2 for n in range(-3, 3))[:3]
    assert [float(row["lambda"]) for row in rows] == pytest.approx(expected, abs=1e-10)
    assert rows[0]["flux"] == "pi+2"


def test_effective_flux_aliases(capsys, geometry_dir):
    assert run(["effective", "--geom", str(geometry_dir / "circle1.json"), "--flux", "2mpi", "--count", "2"]) == 0
    _, rows = read_csv(capsys.readouterr().out)
    assert rows[0]["flux"] == "2-pi"


def test_full_symbol_model(capsys):
    geometry = '{"variant": "circle", "R": 1.0, "ns": 64}'
    args = ["effective", "--geom", geometry, "--model", "full_symbol_weyl", "--eps", "0.1", "--count", "2"]
    assert run(args) == 0
    _, rows = read_csv(capsys.readouterr().out)
    assert rows[0]["model"] == "full_symbol_weyl"
    assert float(rows[0]["lambda"]) == pytest.approx(math.pi / 4, abs=0.01)


def test_full2d_command(tmp_path):
    path = tmp_path / "report.json"
    geometry = '{"variant": "circle", "R": 1.0, "ns": 64}'
    args = ["full2d", "--geom", geometry, "--eps", "0.1", "--P", "4", "--Nt", "4", "--output", str(path)]
    assert run(args) == 0
    (report,) = json.loads(path.read_text())["reports"]
    assert report["epsilon"] == 0.1
    assert report["symmetry_defect"] <= 1e-8
    assert report["winning_flux"] == "pi+2"


def test_usage_errors(capsys):
    assert run(["series", "--order"]) == 2
    assert run(["no-such-command"]) == 2
    assert run(["transverse", "--mu-range", "0:1"]) == 2
    assert run(["transverse", "--mu-range", "0:1:3", "--branch", "0"]) == 2
    assert run(["effective", "--geom", '{"variant": "circle", "R": 1}', "--flux", "pi"]) == 2
    assert run(["effective", "--geom", '{"variant": "circle", "R": 1}', "--model", "full_symbol_weyl"]) == 2


def test_missing_option_value_is_a_usage_error(capsys):
    assert run(["series", "--order"]) == 2
    assert "--order" in capsys.readouterr().err


def test_help_exits_cleanly(capsys):
    assert run(["series", "--help"]) == 0
    assert "--order" in capsys.readouterr().out


def test_invalid_parameter_values_exit_with_validation_code(capsys):
    assert run(["series", "--order", "-1"]) == 2
    assert run(["dispersion", "--mu", "0", "--xi-range", "0:1:2", "--branches", "0"]) == 2
    assert run(["effective", "--geom", '{"variant": "circle", "R": 1}', "--sign-choice", "0"]) == 2
    assert "invalid parameters" in capsys.readouterr().err


def test_run_config_rejects_unknown_parameters():
    with pytest.raises(ValidationError):
        SeriesParameters(order=4, colour="red")
    with pytest.raises(ValidationError):
        RunConfig(command="series", parameters={"order": 4, "colour": "red"})
    config = RunConfig(command="verify", parameters=VerifyParameters(
        jmax=2, P=6, Nt=6, Nq_t=None, workers=2, check_truncation=True
    ))
    assert config.model_dump(mode="json")["parameters"]["workers"] == 2


def test_metric_failure_exit_code(capsys):
    args = ["verify", "--geom", '{"variant": "circle", "R": 1.0}', "--eps-list", "1.5", "--P", "2", "--Nt", "2"]
    assert run(args) == 2
    assert "metric positivity" in capsys.readouterr().err


def test_environment_errors_exit_with_validation_code(monkeypatch, capsys):
    monkeypatch.setenv("DIRACWG_WORKERS", "many")
    assert run(["dispersion", "--mu", "0", "--xi-range", "0:1:2"]) == 2


def test_truncation_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setenv("DIRACWG_TRUNCATION_TOL", "1e-30")
    args = ["full2d", "--geom", '{"variant": "ellipse", "a": 1.5, "b": 1}', "--eps", "0.2", "--P", "4", "--Nt", "2"]
    assert run(args) == 3


@pytest.mark.slow
def test_verify_circle(capsys, geometry_dir):
    args = [
        "verify",
        "--geom", str(geometry_dir / "circle1.json"),
        "--eps-list", "0.2,0.1,0.05",
        "--m", "0",
        "--jmax", "2",
        "--P", "6",
        "--Nt", "6",
    ]
    assert run(args) == 0
    captured = capsys.readouterr()
    assert "FAIL" not in captured.err
    assert "PASS" in captured.err
    assert "winning flux: pi+2" in captured.err
    comments, rows = read_csv(captured.out)
    assert "# winning_flux: pi+2" in comments
    assert len(rows) == 6
