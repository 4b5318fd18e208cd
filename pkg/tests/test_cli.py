import argparse
import json

import pytest

from spinadder import cli
from spinadder import experiments as ex
from spinadder.gate_compiler import read_schedule


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    lines = out.splitlines()
    config = json.loads(lines[0].split(" ", 2)[2]) if lines and lines[0].startswith("#") else None
    result = json.loads(lines[-1]) if len(lines) > 1 else None
    return code, config, result, err


@pytest.mark.parametrize("text,value", [("12", 12), ("0b101", 5), ("0x1f", 31), ("1<<99", 1 << 99),
                                        ("0b1 << 3", 8), ("1_000", 1000)])
def test_parse_int(text, value):
    assert cli.parse_int(text) == value


@pytest.mark.parametrize("text", ["-1", "abc", "1.5", "1<<"])
def test_parse_int_rejects(text):
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_int(text)


def test_parse_term():
    assert cli.parse_term("5") == (5, 1)
    assert cli.parse_term("0b11:0.5") == (3, 0.5)
    assert cli.parse_term("2:0,-1") == (2, -1j)
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_term("2:x")


def test_compile(capsys, tmp_path):
    path = tmp_path / "sched.jsonl"
    code, config, result, _ = run(capsys, "compile", "--length", "2", "--a", "3", "--out",
                                  str(path))
    assert code == 0
    assert config["L"] == 2 and config["a"] == "0x3"
    assert result["pulse_count"] < 27 * 2
    assert len(read_schedule(path)) == result["pulse_count"]
    first = path.read_bytes()
    run(capsys, "compile", "--length", "2", "--a", "3", "--out", str(path))
    assert path.read_bytes() == first


def test_compile_with_corrections(capsys, tmp_path):
    path = tmp_path / "sched.jsonl"
    code, *_ = run(capsys, "compile", "--length", "3", "--a", "5", "--phase-correct", "--out",
                   str(path))
    assert code == 0
    rec = json.loads(path.read_text().splitlines()[0])
    assert rec["corrections"] and "phi_rad" in rec["corrections"][0]


def test_verify(capsys):
    code, _, result, _ = run(capsys, "verify", "--length", "3", "--a", "5", "--b", "2")
    assert code == 0
    assert result["agree"] and result["max_abs_diff"] < 1e-12


def test_verify_with_pruning(capsys):
    code, _, result, _ = run(capsys, "verify", "--length", "4", "--a", "9", "--b", "6",
                             "--rabi", "0.1004", "--prune-eps", "1e-12")
    assert code == 0 and result["pruned_mass"] > 0
    assert result["max_abs_diff"] <= result["tolerance"]


def test_run_outputs_are_deterministic(capsys, tmp_path):
    argv = ["run", "--length", "4", "--a", "0b1011", "--b", "3:1", "--b", "6:0,1",
            "--out", str(tmp_path / "r.json"), "--dump-state", str(tmp_path / "s.csv")]
    code, config, result, _ = run(capsys, *argv)
    assert code == 0
    assert config["b"] == [["0x3", [1.0, 0.0]], ["0x6", [0.0, 1.0]]]
    assert set(result["outcomes"]) == {"0x3", "0x6"}
    first = [(tmp_path / f).read_bytes() for f in ("r.json", "s.csv")]
    run(capsys, *argv)
    assert [(tmp_path / f).read_bytes() for f in ("r.json", "s.csv")] == first


def test_run_ideal(capsys):
    code, _, result, _ = run(capsys, "run", "--length", "5", "--a", "31", "--b", "17", "--ideal")
    assert code == 0 and result["p0"] == 1.0 and result["n_error"] == 0


def test_spectrum(capsys, tmp_path):
    path = tmp_path / "sp.csv"
    code, _, result, _ = run(capsys, "spectrum", "--length", "6", "--rabi", "0.1002", "--out",
                             str(path))
    assert code == 0
    rows = ex.read_spectrum(path)
    assert len(rows) == result["n_error"] > 0
    assert [c for c, _ in rows] == sorted(c for c, _ in rows)


def test_sweep(capsys, tmp_path):
    path = tmp_path / "sw.csv"
    code, config, result, _ = run(capsys, "sweep", "--length", "4", "--omega-min", "0.0999",
                                  "--omega-max", "0.1002", "--steps", "4", "--out", str(path))
    assert code == 0
    assert config["prune_eps"] == ex.SWEEP_PRUNE_EPS
    assert len(path.read_text().splitlines()) == 5
    assert result["points"] == 4


def test_find_rabi(capsys):
    code, _, result, _ = run(capsys, "find-rabi", "--length", "3")
    assert code == 0
    assert 0.0999 <= result["rabi"] <= 0.1002
    assert result["max_flip_probability"] <= 2e-6


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "chain.cfg"
    cfg.write_text("# chain constants\nj_ac = 1.5\nj_bc=2.5\nomega1_hz=1e8\n")
    code, config, _, _ = run(capsys, "compile", "--length", "2", "--config", str(cfg),
                             "--j-bc", "4")
    assert code == 0
    assert (config["j_ac"], config["j_bc"], config["j_ab"]) == (1.5, 4.0, 3.0)
    assert config["omega1_hz"] == 1e8


@pytest.mark.parametrize("body", ["j_xx = 1\n", "j_ac 1\n", "j_ac = one\n", "j_ac = -1\n"])
def test_bad_config(capsys, tmp_path, body):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(body)
    code, _, _, err = run(capsys, "compile", "--length", "2", "--config", str(cfg))
    assert code == 1 and "error" in err


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["run", "--bogus"],
    ["run", "--length", "3", "--a", "9"],
    ["run", "--length", "3", "--b", "8"],
    ["run", "--length", "3", "--rabi", "-0.1"],
    ["run", "--length", "3", "--b", "1", "--b", "1"],
    ["compile", "--length", "2", "--config", "/nonexistent/file"],
    ["spectrum", "--length", "2", "--out", "/nonexistent/dir/x.csv"],
])
def test_validation_errors_exit_1(capsys, argv):
    code, *_ = run(capsys, *argv)
    assert code == 1


def test_tripwire_exit_2(capsys, monkeypatch):
    monkeypatch.setattr(ex, "expected_output_state", lambda a, b, spec: 1)
    code, _, _, err = run(capsys, "run", "--length", "3", "--a", "2", "--b", "1")
    assert code == 2 and "tripwire" in err


def test_headline_run(capsys):
    code, _, result, _ = run(capsys, "run", "--length", "100", "--a", "1<<99", "--b", "1",
                             "--rabi", "0.10005")
    assert code == 0
    assert result["pulse_count"] == 2095
    assert abs(result["p0"] - 0.99889) <= 0.005
