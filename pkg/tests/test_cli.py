"""CLI subcommands: summaries, file outputs, exit codes, config layering."""

import json

import numpy as np
import pytest

from batchbandit.cli import main
from batchbandit.core import SymmetricPrior, UGrid
from batchbandit.dp import DpConfig, solve_invariant
from batchbandit.simulate import BatchTrialConfig, simulate_bernoulli, simulate_gaussian
from batchbandit.strategy_io import load_strategy


def run_json(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out
    assert rc == 0, out
    return json.loads(out)


def test_solve_pure_initial_closed_form(capsys):
    doc = run_json(capsys, ["solve", "--epsilon", "0.5", "--d", "1.0"])
    assert doc["bayes_risk"] == 1.0
    assert doc["bayes_risk_no_initial"] == 0.0
    assert doc["epsilon"] == 0.5
    assert doc["d"] == 1.0


def test_solve_headline_summary_to_file(tmp_path, capsys):
    out = tmp_path / "summary.json"
    rc = main(["solve", "--epsilon", "0.02", "--d", "1.6", "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["bayes_risk"] == pytest.approx(0.65, abs=0.02)
    assert doc["bayes_risk_no_initial"] < doc["bayes_risk"]


def test_solve_vanishing_gap(capsys):
    doc = run_json(capsys, ["solve", "--epsilon", "0.02", "--d", "0.000001"])
    assert doc["bayes_risk"] < 1e-4


def test_solve_needs_a_prior(capsys):
    rc = main(["solve", "--epsilon", "0.5"])
    assert rc == 2
    assert "--d or --prior-file" in capsys.readouterr().err


def test_validation_failure_leaves_no_output(tmp_path, capsys):
    out = tmp_path / "x.json"
    rc = main(["solve", "--epsilon", "0.3", "--d", "1.0", "--out", str(out)])
    assert rc == 2
    assert "epsilon" in capsys.readouterr().err
    assert not out.exists()


def test_prior_file(tmp_path, capsys):
    pf = tmp_path / "prior.json"
    pf.write_text(json.dumps({"atoms": [[0.9, 0.4], [1.8, 0.6]]}))
    doc = run_json(
        capsys,
        ["solve", "--epsilon", "0.25", "--u-max", "2.0", "--du", "0.05",
         "--prior-file", str(pf)],
    )
    assert doc["d"] is None
    assert doc["bayes_risk"] > 0.0


def test_config_file_supplies_and_flags_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"epsilon": 0.5, "d": 2.0}))
    doc = run_json(capsys, ["solve", "--config", str(cfg)])
    assert doc["bayes_risk"] == 2.0
    doc = run_json(capsys, ["solve", "--config", str(cfg), "--d", "1.0"])
    assert doc["bayes_risk"] == 1.0


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"epsilon": 0.5, "d": 1.0, "foo": 3}))
    rc = main(["solve", "--config", str(cfg)])
    assert rc == 2
    assert "foo" in capsys.readouterr().err


def test_no_subcommand_exits_2(capsys):
    assert main([]) == 2


def test_export_strategy_round_trip(tmp_path):
    path = tmp_path / "s.csv"
    rc = main(
        ["export-strategy", "--epsilon", "0.1", "--d", "1.6",
         "--u-max", "2.0", "--du", "0.05", "--out", str(path)]
    )
    assert rc == 0
    assert path.exists() and (tmp_path / "s.meta.json").exists()
    loaded = load_strategy(path)
    direct = solve_invariant(
        DpConfig(0.1, SymmetricPrior.two_point(1.6), UGrid(2.0, 0.05))
    ).strategy
    assert np.array_equal(loaded.actions, direct.actions)
    a = simulate_gaussian(10, 1.6, loaded, 2000, seed=3)
    b = simulate_gaussian(10, 1.6, direct, 2000, seed=3)
    assert a.normalized_loss_mean == b.normalized_loss_mean


def test_simulate_matches_in_process_run(tmp_path, capsys):
    path = tmp_path / "s.csv"
    assert main(["export-strategy", "--epsilon", "0.05", "--d", "1.6",
                 "--u-max", "2.0", "--du", "0.05", "--out", str(path)]) == 0
    doc = run_json(
        capsys,
        ["simulate", "--t", "1000", "--m", "50", "--p", "0.5", "--d", "1.6",
         "--strategy", str(path), "--reps", "2000", "--seed", "9"],
    )
    assert doc["replications"] == 2000
    cfg = BatchTrialConfig(1000, 50, 0.5, 1.6, replications=2000, seed=9)
    direct = simulate_bernoulli(cfg, load_strategy(path))
    assert doc["normalized_loss_mean"] == pytest.approx(
        direct.normalized_loss_mean, abs=5e-7
    )


def test_simulate_gaussian_model(tmp_path, capsys):
    path = tmp_path / "s.csv"
    assert main(["export-strategy", "--epsilon", "0.05", "--d", "1.6",
                 "--u-max", "2.0", "--du", "0.05", "--out", str(path)]) == 0
    doc = run_json(
        capsys,
        ["simulate", "--model", "gaussian", "--d", "1.6", "--strategy", str(path),
         "--reps", "2000", "--seed", "5"],
    )
    assert doc["model"] == "gaussian"
    assert doc["replications"] == 2000


def test_simulate_reports_malformed_strategy(tmp_path, capsys):
    path = tmp_path / "s.csv"
    assert main(["export-strategy", "--epsilon", "0.1", "--d", "1.6",
                 "--u-max", "2.0", "--du", "0.05", "--out", str(path)]) == 0
    lines = path.read_text().splitlines()
    parts = lines[4].split(",")
    parts[2] = "x"
    lines[4] = ",".join(parts)
    path.write_text("\n".join(lines) + "\n")
    rc = main(["simulate", "--t", "1000", "--m", "100", "--strategy", str(path)])
    assert rc == 2
    assert "line 5" in capsys.readouterr().err


def test_simulate_missing_meta_sidecar(tmp_path, capsys):
    path = tmp_path / "s.csv"
    assert main(["export-strategy", "--epsilon", "0.1", "--d", "1.6",
                 "--u-max", "2.0", "--du", "0.05", "--out", str(path)]) == 0
    (tmp_path / "s.meta.json").unlink()
    rc = main(["simulate", "--t", "1000", "--m", "100", "--strategy", str(path)])
    assert rc == 2
    assert "metadata" in capsys.readouterr().err


def test_figure1_csv_shape_and_determinism(tmp_path):
    out = tmp_path / "fig.csv"
    argv = ["figure1", "--epsilon", "0.25", "--d-min", "0.5", "--d-max", "1.5",
            "--step", "0.5", "--u-max", "2.0", "--du", "0.05", "--out", str(out)]
    assert main(argv) == 0
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0] == "d,bayes_risk,expected_loss,bayes_risk_no_init,expected_loss_no_init"
    assert len(lines) == 4
    for line in lines[1:]:
        d, bayes, exp, bayes_ni, exp_ni = (float(x) for x in line.split(","))
        assert exp >= bayes - 1e-5
        assert exp_ni >= bayes_ni - 1e-5
    assert main(argv) == 0
    assert out.read_text() == text


def test_figure1_rejects_bad_range(tmp_path, capsys):
    out = tmp_path / "fig.csv"
    rc = main(["figure1", "--epsilon", "0.25", "--d-min", "2.0", "--d-max", "1.0",
               "--step", "0.5", "--out", str(out)])
    assert rc == 2
    assert not out.exists()


def test_pde_subcommand(capsys):
    doc = run_json(
        capsys,
        ["pde", "--epsilon", "0.01", "--du", "0.1001", "--u-max", "2.3", "--d", "1.6"],
    )
    assert 0.6 < doc["limit_risk"] < 0.7
    assert doc["limit_risk_no_initial"] < doc["limit_risk"]


def test_pde_unstable_pairing_exits_2(capsys):
    rc = main(["pde", "--epsilon", "0.001", "--du", "0.023", "--d", "1.57"])
    assert rc == 2
    assert "unstable" in capsys.readouterr().err


def test_search_subcommand(capsys):
    doc = run_json(capsys, ["search", "--backend", "dp", "--epsilon", "0.02"])
    assert 1.5 <= doc["d_star"] <= 1.75
    assert doc["risk_star"] == pytest.approx(0.65, abs=0.02)
    assert doc["boundary"] is False
    assert len(doc["curve"]) == 9


def test_search_multi_atom_needs_dp(capsys):
    rc = main(["search", "--backend", "pde", "--epsilon", "0.01",
               "--multi-atom", "2"])
    assert rc == 2
