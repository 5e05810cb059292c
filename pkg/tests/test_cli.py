import json
import math

import numpy as np
import pytest

import liberation.bridge
from liberation.cli import main


def test_evolve_writes_trajectory(tmp_path):
    out = tmp_path / "traj.csv"
    rc = main(["evolve", "--alpha", "0", "--beta", "0", "--init", "equal",
               "--n-moments", "3", "--t-end", "1.0", "--step", "0.001",
               "--store-every", "100", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "t,f1,f2,f3"
    assert len(lines) == 12
    for line in lines[1:]:
        t, f1 = (float(v) for v in line.split(",")[:2])
        assert abs(f1 - math.exp(-t)) < 1e-8


def test_stationary_reports_atoms(tmp_path, capsys):
    out = tmp_path / "nu.json"
    rc = main(["stationary", "--alpha", "0.2", "--beta", "-0.4",
               "--n-moments", "4", "--out", str(out)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert abs(payload["atom_zero"] - 0.1) < 1e-12
    assert abs(payload["atom_pi"] - 0.3) < 1e-12
    assert abs(payload["mass"] - 1.0) < 1e-5
    assert abs(payload["moments"][0] - -0.08) < 1e-12
    stored = json.loads(out.read_text())
    assert len(stored["grid"]) == len(stored["density"])


def test_flow_csv_header(tmp_path):
    out = tmp_path / "flow.csv"
    rc = main(["flow", "--alpha", "0.2", "--beta", "-0.4", "--init", "free",
               "--z0-re", "0.3", "--t-end", "0.2", "--step", "0.001",
               "--record-every", "50", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "t,z0_re,z0_im,phi_re,phi_im,h_re,h_im,alive"
    assert len(lines) == 6
    assert lines[-1].endswith(",1")


def test_bridge_first_projection_moment(capsys):
    rc = main(["bridge", "--alpha", "0.2", "--beta", "-0.4",
               "--n-moments", "3"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["source"] == "stationary"
    assert abs(payload["projection_moments"][0] - 0.18) < 1e-12


def test_bridge_evolved_is_prompt(capsys):
    # the evolve path stores only the endpoint; it must not blow up the
    # step count to honour an oversized storage stride
    rc = main(["bridge", "--alpha", "0.2", "--beta", "-0.4",
               "--n-moments", "2", "--t-end", "0.4"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    # classical initial data pins f1 at alpha beta for all t
    assert abs(payload["symmetry_moments"][0] - -0.08) < 1e-12


def test_oracle_csv_shape(tmp_path, capsys):
    out = tmp_path / "mc.csv"
    rc = main(["oracle", "--n-dim", "8", "--alpha", "0.5", "--beta", "0.0",
               "--preset", "free", "--delta", "0.2", "--n-samples", "2",
               "--n-moments", "2", "--t-grid", "0.4,0.8", "--out", str(out)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["achieved_alpha"] == 0.5
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 9
    assert {line.split(",")[0] for line in lines[1:]} == {"symmetry",
                                                          "projection"}


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 0.1, "beta": 0.2, "t_end": 0.1,
                               "n_moments": 2}))
    rc = main(["evolve", "--config", str(cfg), "--alpha", "0.3"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["alpha"] == 0.3
    assert payload["beta"] == 0.2


def test_missing_field_names_it(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 0.1}))
    rc = main(["evolve", "--config", str(cfg), "--t-end", "1"])
    assert rc == 1
    assert "missing config field: beta" in capsys.readouterr().err


def test_config_must_be_object(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    rc = main(["evolve", "--config", str(cfg), "--alpha", "0", "--beta", "0",
               "--t-end", "1"])
    assert rc == 1
    assert "JSON object" in capsys.readouterr().err


def test_unknown_initial_law_from_config(tmp_path, capsys):
    # argparse guards the flag, but a config file can smuggle anything in
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 0.0, "beta": 0.0, "t_end": 1.0,
                               "init": "bogus"}))
    rc = main(["evolve", "--config", str(cfg)])
    assert rc == 1
    assert "unknown initial law" in capsys.readouterr().err


def test_verify_subset(tmp_path, capsys):
    out = tmp_path / "report.json"
    rc = main(["verify", "--criteria", "2,9", "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "[ 2] PASS" in text
    assert "[ 9] PASS" in text
    assert "2/2 criteria passed" in text
    report = json.loads(out.read_text())
    assert [r["id"] for r in report] == [2, 9]
    assert all(r["passed"] for r in report)
    assert report[0]["tolerance"] == 1e-8
    assert report[1]["tolerance"] == 1e-10


def test_verify_mutation_is_caught(monkeypatch, capsys):
    """Corrupting one binomial coefficient must fail the identity check
    and the exit code, with the report naming the identity."""
    clean = liberation.bridge.binomial_rows

    def corrupted(n_max):
        t = clean(n_max)
        if n_max >= 3:
            t[2, 1] *= 1.0 + 1e-6
        return t

    monkeypatch.setattr(liberation.bridge, "binomial_rows", corrupted)
    rc = main(["verify", "--criteria", "10"])
    text = capsys.readouterr().out
    assert rc == 1
    assert "FAIL" in text
    assert "binomial identity" in text
    assert "0/1 criteria passed" in text
