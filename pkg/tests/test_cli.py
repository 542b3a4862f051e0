import json

import pytest

from fusioncert.cli import main
from fusioncert.strategies import strategy_dataset


def test_scenarios_list_and_show(capsys):
    assert main(["scenarios", "list"]) == 0
    assert "evans-uc" in capsys.readouterr().out
    assert main(["scenarios", "show", "evans-uc", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["eligible"] == ["B"]


def test_usage_errors_exit_two(capsys):
    assert main(["scenarios", "show", "nope"]) == 2
    assert main(["bogus"]) == 2
    assert main(["reproduce", "nope"]) == 2
    assert main(["check", "--mode", "membership"]) == 2


def test_strategy_run_writes_tables(tmp_path, capsys):
    assert main(["strategy", "run", "chsh-instrument", "--out", str(tmp_path)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert "chsh-instrument.json" in names
    assert any(n.endswith(".csv") for n in names)


def test_inflation_exit_codes(tmp_path, capsys):
    assert main(["inflate", "--strategy", "evans-werner", "--param", "v=1", "--out", str(tmp_path)]) == 1
    assert (tmp_path / "inflation_certificate.json").exists()
    assert main(["inflate", "--strategy", "evans-werner", "--param", "v=1/2"]) == 0


def test_check_from_data_file(tmp_path, capsys):
    _, h = strategy_dataset("md-pure-state")
    path = tmp_path / "data.json"
    path.write_text(json.dumps(h.to_json()))
    base = ["check", "--mode", "membership", "--scenario", "measurement-dependence", "--data", str(path)]
    assert main(base + ["--tables", "P", "do(A)"]) == 0
    assert main(base) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["check", "--mode", "membership", "--scenario", "measurement-dependence", "--data", str(bad)]) == 2


def test_mq_and_witness_modes(capsys):
    assert main(["mq", "--strategy", "evans-werner", "--param", "v=1", "--float", "--json"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["lower"] > 0.4
    assert main(["check", "--mode", "witnesses", "--strategy", "evans-werner", "--param", "v=1"]) == 1
    assert main(["witness", "show", "bilocal-fusion"]) == 0
    assert main(["witness", "eval", "hardy-P", "--strategy", "chsh-instrument"]) == 1


def test_geometry_facets_csv(tmp_path, capsys):
    args = ["geometry", "--scenario", "measurement-dependence", "--tables", "P", "do(A)", "--classify",
            "--out", str(tmp_path), "--json"]
    assert main(args) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["facets"] == 24
    rows = (tmp_path / "facets.csv").read_text().splitlines()
    assert len(rows) == 1 + 24 + 3


def test_reproduce_single_claim(tmp_path, capsys):
    assert main(["reproduce", "hardy-gap", "--out", str(tmp_path)]) == 0
    assert "[PASS] criterion  1" in capsys.readouterr().out
    assert (tmp_path / "reproduce.csv").exists()
