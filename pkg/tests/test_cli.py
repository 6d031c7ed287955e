import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from qigrav.cli import COMMANDS, main

TSIRELSON = 2 * math.sqrt(2)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def header(text):
    return {k: v for k, _, v in (line[2:].partition(": ") for line in text.splitlines() if line.startswith("# "))}


def test_mz_default_grid(capsys):
    code, out, _ = run(capsys, "mz")
    assert code == 0
    rows = table(out)
    assert len(rows) == 64
    for r in rows:
        phi = float(r["phi"])
        assert abs(float(r["p_d1"]) - (1 + math.cos(phi)) / 2) < 1e-12
    assert float(rows[0]["p_d1"]) == 1.0


def test_metadata_echo(capsys):
    _, out, _ = run(capsys, "mz", "--seed", "123", "--phi-grid", "0:pi:3", "--shots", "10")
    h = header(out)
    assert h["seed"] == "123" and h["subcommand"] == "mz"
    assert json.loads(h["parameters"]) == {"phi_grid": "0:pi:3", "shots": "10"}


@pytest.mark.parametrize(
    "argv",
    [
        ["mz", "--shots", "1000"],
        ["sg", "--shots", "5000"],
        ["causal-game", "simulate", "--rounds", "5000", "--workers", "3"],
        ["chsh", "quantum", "--format", "json"],
        ["temporal-bell"],
    ],
)
def test_same_seed_same_bytes(capsys, argv):
    first = run(capsys, *argv, "--seed", "99")[1]
    second = run(capsys, *argv, "--seed", "99")[1]
    assert first == second


@pytest.mark.parametrize("argv", [["mz", "--shots", "1000"], ["causal-game", "simulate", "--rounds", "5000"]])
def test_seed_changes_samples(capsys, argv):
    assert table(run(capsys, *argv, "--seed", "1")[1]) != table(run(capsys, *argv, "--seed", "2")[1])


def test_causal_game_seed_reproducible_across_backends(capsys):
    rows = []
    for backend in ("python", "auto"):
        _, out, _ = run(capsys, "causal-game", "simulate", "--seed", "7", "--rounds", "20000", "--backend", backend)
        rows.append(table(out)[0])
    assert rows[0]["p_suc"] == rows[1]["p_suc"]


def test_chsh_modes(capsys):
    assert float(table(run(capsys, "chsh", "classical-max")[1])[0]["value"]) == 2.0
    q = table(run(capsys, "chsh", "quantum")[1])[0]
    assert abs(float(q["value"]) - TSIRELSON) < 1e-9


def test_lhv_file_mode(capsys, tmp_path):
    path = tmp_path / "model.json"
    lambdas = [{"weight": 0.5, "alice": [1, 0], "bob": [1, 1]}, {"weight": 0.5, "alice": [0, 1], "bob": [0, 1]}]
    path.write_text(json.dumps({"lambdas": lambdas}))
    code, out, err = run(capsys, "chsh", "lhv-file", "--file", str(path))
    assert code == 0, err
    assert abs(float(table(out)[0]["value"])) <= 2 + 1e-9


def test_json_complex_pairs(capsys):
    code, out, _ = run(capsys, "qswitch")
    doc = json.loads(out)
    assert code == 0
    assert doc["metadata"]["subcommand"] == "qswitch"
    amps = doc["result"]["joint"]["amplitudes"]
    assert all(isinstance(a, list) and len(a) == 2 for a in amps)
    norm = sum(re * re + im * im for re, im in amps)
    assert abs(norm - 1) < 1e-12


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nphi-grid = 0:pi:5\nseed = 4\n")
    code, out, _ = run(capsys, "mz", "--config", str(cfg))
    assert code == 0 and len(table(out)) == 5 and header(out)["seed"] == "4"
    # flags override the file
    _, out, _ = run(capsys, "mz", "--config", str(cfg), "--phi-grid", "0:1:2")
    assert len(table(out)) == 2


def test_unknown_config_key_is_usage_error(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "mz", "--config", str(cfg))
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"] == "UsageError"


@pytest.mark.parametrize("argv", [["nope"], ["mz", "--bogus", "1"], ["mz", "--seed", "-1"], ["mz", "--phi-grid", "0:1"]])
def test_usage_errors_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_simulation_error_record(capsys):
    code, out, err = run(capsys, "grav-switch", "--M", "0")
    assert code == 1 and out == ""
    rec = json.loads(err)
    assert rec["error"] == "ProtocolInfeasibleError" and rec["subcommand"] == "grav-switch"


def test_empty_branch_reported_without_state(capsys):
    code, out, _ = run(capsys, "qswitch", "--op-a", "I", "--op-b", "I", "--format", "csv")
    assert code == 0
    minus = [r for r in table(out) if r["branch"] == "-"]
    assert len(minus) == 1 and float(minus[0]["probability"]) == 0.0 and minus[0]["re"] == ""


def test_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("QIGRAV_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "gie", "--format", "json")
    assert code == 0 and out == ""
    doc = json.loads((tmp_path / "gie.json").read_text())
    assert doc["metadata"]["subcommand"] == "gie"
    run(capsys, "sg", "-o", "sub/chain.csv")
    assert (tmp_path / "sub" / "chain.csv").exists()


def test_grav_switch_and_temporal_bell(capsys):
    code, out, _ = run(capsys, "grav-switch")
    assert code == 0
    gs = json.loads(out)["result"]
    assert set(gs["order_branches"]) == {"A<B", "B<A"}
    assert abs(gs["branches"]["+"]["probability"] - 0.5) < 1e-9
    tb = json.loads(run(capsys, "temporal-bell")[1])["result"]
    for label in "+-":
        assert abs(tb["branches"][label]["chsh"]["value"] - TSIRELSON) < 1e-9


def test_every_subcommand_has_help(capsys):
    for name in COMMANDS:
        with pytest.raises(SystemExit) as exc:
            main([name, "--help"])
        assert exc.value.code == 0
    capsys.readouterr()


def test_module_entry_point(tmp_path):
    env = dict(os.environ)
    env.pop("QIGRAV_OUTPUT_DIR", None)
    cmd = [sys.executable, "-m", "qigrav", "causal-game", "simulate", "--seed", "7", "--rounds", "1000"]
    a = subprocess.run(cmd, capture_output=True, env=env, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, env=env, check=True).stdout
    assert a == b and b"p_suc" in a
    bad = subprocess.run([sys.executable, "-m", "qigrav", "nope"], capture_output=True, env=env)
    assert bad.returncode == 2
