import json

import pytest
from click.testing import CliRunner

from conftest import canonical_rank4_sequence, seq_from_betas
from tracmom.cli import main
from tracmom.pipeline import gen_random

runner = CliRunner()


def write_seq(tmp_path, seq, name="seq.json"):
    path = tmp_path / name
    path.write_text(json.dumps(seq.to_json()))
    return str(path)


def test_solve_exit_code_exists(tmp_path):
    path = write_seq(tmp_path, canonical_rank4_sequence(0.0))
    result = runner.invoke(main, ["solve", path])
    assert result.exit_code == 0, result.output
    assert "exists" in result.output


def test_solve_exit_code_not_exists(tmp_path):
    seq = seq_from_betas(XX=1.0, YY=1.0, XXXX=0.2, XXYY=1.0, XYXY=-1.0,
                         YYYY=1.0)
    path = write_seq(tmp_path, seq)
    result = runner.invoke(main, ["solve", path])
    assert result.exit_code == 1


def test_solve_exit_code_input_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"beta": {"1": 1.0}}))
    result = runner.invoke(main, ["solve", str(path)])
    assert result.exit_code == 3


def test_solve_json_flag(tmp_path):
    path = write_seq(tmp_path, canonical_rank4_sequence(0.3))
    result = runner.invoke(main, ["--json", "solve", path])
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["verdict"] == "exists"


def test_verify_command(tmp_path):
    mu, seq = gen_random("bc4", seed=8)
    spath = write_seq(tmp_path, seq)
    mpath = tmp_path / "measure.json"
    mpath.write_text(json.dumps(mu.to_json()))
    result = runner.invoke(main, ["verify", spath, str(mpath)])
    assert result.exit_code == 0, result.output
    assert "OK" in result.output


def test_reduce_command(tmp_path):
    mu, seq = gen_random("bc2", seed=1)
    path = write_seq(tmp_path, seq)
    result = runner.invoke(main, ["reduce", path])
    assert result.exit_code == 0, result.output
    body = json.loads(result.output)
    assert body["case"] == "BC2"


def test_flat_check_command(tmp_path):
    from test_flat import rel3_family
    path = write_seq(tmp_path, rel3_family(2.0))
    result = runner.invoke(main, ["flat-check", path])
    assert result.exit_code == 1  # never flat for this family
    assert "C16-C23" in result.output


def test_gen_random_command():
    result = runner.invoke(main, ["gen-random", "rel1", "--seed", "3"])
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["case"] == "rel1"


def test_stdin_input():
    seq = canonical_rank4_sequence(0.0)
    result = runner.invoke(main, ["solve", "-"],
                           input=json.dumps(seq.to_json()))
    assert result.exit_code == 0
