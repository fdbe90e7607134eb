""" Test suite for the command-line entry point and its exit codes """
import json
import sys
from dataclasses import replace

sys.path.append("..")

import pytest

from d2dcell import cli
from d2dcell.cli import *
from d2dcell.constants.misc import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
)
from d2dcell.errors import NonConvergenceError
from d2dcell.sweeps import COLUMNS


def test_help_exits_ok(capsys):
    """ Tests that --help is not an error """
    assert main(["--help"]) == EXIT_OK
    assert "solve-xi" in capsys.readouterr().out


def test_unknown_verb_is_a_configuration_error():
    """ Tests that argparse failures map to exit code 1 """
    assert main(["plot"]) == EXIT_CONFIG


def test_eval_writes_csv_to_stdout(capsys):
    """ Tests the default point: header plus one outage row """
    assert main(["eval", "--quiet"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert len(lines) == 2
    assert lines[1].startswith("xi_db,0,outage_bs,")


def test_eval_writes_json_file(tmp_path):
    """ Tests --format json with --out and a --set override """
    path = tmp_path / "eval.json"
    code = main(
        [
            "eval",
            "--quiet",
            "--format",
            "json",
            "--out",
            str(path),
            "--set",
            "sweep.quantities=[p_d2d, m_bar_d2d]",
        ]
    )
    assert code == EXIT_OK
    rows = json.loads(path.read_text())
    assert [row["quantity"] for row in rows] == ["p_d2d", "m_bar_d2d"]


def test_eval_unknown_key_is_a_configuration_error():
    """ Tests that a misspelled --set key exits with 1 """
    assert main(["eval", "--quiet", "--set", "geometry.radiuss=400"]) == (
        EXIT_CONFIG
    )


def test_eval_numerical_failure_exits_two(monkeypatch):
    """ Tests that numerical errors map to exit code 2 """

    def failing(config):
        raise NonConvergenceError("quadrature stalled")

    monkeypatch.setattr(cli, "run_eval", failing)
    assert main(["eval", "--quiet"]) == EXIT_NUMERICAL


def test_solve_xi_saturated_point(capsys, scenario):
    """ Tests that a point meeting the target with every p-DUE admitted
    reports an infinite threshold """
    point = scenario("saturated_qos")
    overrides = []
    for key, value in point.items():
        overrides += ["--set", f"{key}={value}"]
    code = main(["solve-xi", "--quiet", "--format", "json", *overrides])
    assert code == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert [row["quantity"] for row in rows] == ["xi_db", "outage_bs"]
    assert all(row["status"] == "saturated" for row in rows)
    assert rows[0]["analytic"] == float("inf")


def test_solve_xi_reaches_target(capsys):
    """ Tests the default scenario at a 1e-2 target """
    assert main(["solve-xi", "--quiet", "--target", "0.01"]) == EXIT_OK
    row = capsys.readouterr().out.splitlines()[2].split(",")
    assert row[2] == "outage_bs"
    assert float(row[3]) == pytest.approx(0.01, abs=1e-4)


def test_simulate_without_realizations_is_a_configuration_error():
    """ Tests that simulate needs --mc-runs """
    assert main(["simulate", "--quiet"]) == EXIT_CONFIG


def test_simulate_dumps_realizations(tmp_path):
    """ Tests that --dump writes one JSON line per realization """
    dump = tmp_path / "realizations.jsonl"
    out = tmp_path / "simulate.csv"
    code = main(
        [
            "simulate",
            "--quiet",
            "--mc-runs",
            "100",
            "--seed",
            "3",
            "--dump",
            str(dump),
            "--out",
            str(out),
        ]
    )
    assert code == EXIT_OK
    lines = dump.read_text().splitlines()
    assert len(lines) == 100
    assert json.loads(lines[0])["seed"] == 3
    assert out.read_text().splitlines()[1].endswith(",3,ok")


def test_validate_failure_exits_three(monkeypatch):
    """ Tests that a failed comparison maps to exit code 3 """
    monkeypatch.setattr(
        cli,
        "validate_records",
        lambda records: [replace(r, status="fail") for r in records],
    )
    assert main(["validate", "--quiet", "--mc-runs", "100"]) == (
        EXIT_VALIDATION
    )


def test_validate_nothing_to_compare_is_a_configuration_error():
    """ Tests that xi_db alone cannot be validated """
    code = main(
        ["validate", "--quiet", "--mc-runs", "100", "--set", "sweep.quantities=[xi_db]"]
    )
    assert code == EXIT_CONFIG
