"""Command-line interface: artifacts, exit codes, config handling."""

import json

import numpy as np
import pytest

from lightcone import cli


def run(args):
    return cli.main(args)


def read_report(path):
    doc = json.loads(path.read_text())
    assert set(doc) == {"meta", "config", "result"}
    assert doc["meta"]["version"]
    assert doc["meta"]["config_hash"]
    return doc


def test_section_command(tmp_path):
    code = run(["section", "--kind", "constant", "--value", "1.0",
                "--n-theta", "24", "--n-phi", "8", "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "section_report.json")
    assert doc["result"]["classification"] == "Untrapped"
    assert (tmp_path / "section_K.csv").exists()
    data = np.loadtxt(tmp_path / "section_K.csv", delimiter=",", skiprows=1)
    assert np.abs(data[:, 2] - 1.0).max() <= 1e-10


def test_section_marginal(tmp_path):
    code = run(["section", "--kind", "marginal", "--grid-mode", "axisym",
                "--n-theta", "128", "--theta-min", "0.3",
                "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "section_report.json")
    assert doc["result"]["classification"] == "MarginallyTrappedOutgoing"


def test_hyperplane_command(tmp_path):
    code = run(["hyperplane", "--a", "1,0,0,1", "--c", "-2",
                "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "hyperplane_report.json")
    assert doc["result"]["class"] == "NullPlane"
    assert abs(doc["result"]["K_value"]) <= 1e-8
    assert doc["result"]["classification"] == "MarginallyTrappedOutgoing"


def test_greens_command(tmp_path):
    code = run(["greens", "--refinements", "64,128", "--flatness-n", "128",
                "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "greens_report.json")
    res = doc["result"]
    assert res["residuals"]["Y40"][1] <= res["residuals"]["Y40"][0] + 1e-12
    assert res["cos_moment_error"] <= 1e-6
    assert res["flatness"] <= 1e-7


def test_construct_command(tmp_path):
    code = run(["construct", "--eps", "0.2", "--k-scale", "1.1",
                "--n-theta", "256", "--patch-n", "256",
                "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "construct_report.json")
    assert doc["result"]["verdict"] == "trapped"
    assert doc["result"]["k_eps"] > 0
    prof = np.loadtxt(tmp_path / "construct_profile.csv", delimiter=",",
                      skiprows=1)
    assert prof.shape[1] == 4
    assert prof[:, 2].max() < 0.0          # tr chi upper bound negative
    assert (tmp_path / "construct_k.csv").exists()


def test_construct_not_trapped_without_energy(tmp_path):
    code = run(["construct", "--eps", "0.2", "--k-scale", "0.0",
                "--n-theta", "256", "--patch-n", "256",
                "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "construct_report.json")
    assert doc["result"]["verdict"] == "not_trapped"


def test_scan_command_window_gate(tmp_path):
    """With the default windows the pinned eps list sits outside (the
    measured slopes are pre-asymptotic); the command must say so via exit 3."""
    code = run(["scan", "--eps", "0.2,0.1", "--n-theta", "256",
                "--patch-n", "256", "--outdir", str(tmp_path)])
    assert code == 3
    doc = read_report(tmp_path / "scan_report.json")
    assert not doc["result"]["slopes_in_windows"]
    csv = (tmp_path / "scan.csv").read_text().splitlines()
    assert csv[0] == "epsilon,f_eps_at_0,k_eps,slope_f,slope_k"


def test_scan_command_custom_window(tmp_path):
    code = run(["scan", "--eps", "0.2,0.1", "--n-theta", "256",
                "--patch-n", "256", "--slope-window-f=-2.0,-1.0",
                "--slope-window-k=-4.0,-3.0", "--outdir", str(tmp_path)])
    assert code == 0


def test_shortpulse_command(tmp_path):
    code = run(["shortpulse", "--amplitude", "0.8", "--cap-width", "0.4",
                "--delta", "1e-3", "--n-theta", "128", "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "shortpulse_report.json")
    assert doc["result"]["k_max"] > 0.0
    k = np.loadtxt(tmp_path / "shortpulse_k.csv", delimiter=",", skiprows=1)
    assert k[:, 1].min() >= 0.0


def test_section_from_csv(tmp_path):
    """Round trip: export a field, feed it back through --kind csv."""
    from lightcone import build_grid, FULL_SPHERE
    from lightcone.sphere import field_to_csv
    g = build_grid(FULL_SPHERE, 24, 8)
    field_to_csv(g.constant_field(2.0), tmp_path / "f.csv")
    code = run(["section", "--kind", "csv", "--path", str(tmp_path / "f.csv"),
                "--n-theta", "24", "--n-phi", "8", "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "section_report.json")
    assert doc["result"]["f_min"] == 2.0
    assert run(["section", "--kind", "csv", "--n-theta", "24", "--n-phi", "8",
                "--outdir", str(tmp_path)]) == 2      # missing --path


def test_shortpulse_feeds_construct(tmp_path):
    code = run(["shortpulse", "--amplitude", "2.0", "--cap-width", "0.4",
                "--delta", "1e-3", "--n-theta", "256", "--patch-n", "256",
                "--eps", "0.2", "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "shortpulse_report.json")
    assert doc["result"]["construct"]["verdict"] in ("trapped", "not_trapped")
    assert doc["result"]["construct"]["k_eps"] > 0


def test_greens_emits_surface_csv(tmp_path):
    code = run(["greens", "--refinements", "64", "--flatness-n", "128",
                "--outdir", str(tmp_path)])
    assert code == 0
    data = np.loadtxt(tmp_path / "greens_surface.csv", delimiter=",", skiprows=1)
    assert np.abs(data[:, 2] + data[:, 5] + 2.0).max() <= 1e-9


def test_validation_error_exit_code(tmp_path):
    assert run(["construct", "--eps", "0.9", "--outdir", str(tmp_path)]) == 1
    assert run(["section", "--kind", "constant", "--value", "-2",
                "--n-theta", "16", "--n-phi", "4", "--outdir", str(tmp_path)]) == 1


def test_usage_error_exit_code(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["no-such-command"])
    assert exc.value.code == 2
    assert run(["hyperplane", "--a", "1,0,0", "--c", "-1",
                "--outdir", str(tmp_path)]) == 2


def test_selftest_subset(tmp_path):
    code = run(["selftest", "--criteria", "2,9", "--outdir", str(tmp_path)])
    assert code == 0
    doc = read_report(tmp_path / "selftest_report.json")
    assert [c["index"] for c in doc["result"]["criteria"]] == [2, 9]
    assert doc["result"]["passed"]


def test_config_file_defaults_and_flag_priority(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eps": 0.2, "n-theta": 256, "patch-n": 256,
                               "k-scale": 1.1}))
    out1 = tmp_path / "a"
    code = run(["--config", str(cfg), "construct", "--outdir", str(out1)])
    assert code == 0
    doc = read_report(out1 / "construct_report.json")
    assert doc["config"]["eps"] == 0.2
    # explicit flag wins over the config value
    out2 = tmp_path / "b"
    code = run(["--config", str(cfg), "construct", "--eps", "0.25",
                "--outdir", str(out2)])
    assert code == 0
    doc = read_report(out2 / "construct_report.json")
    assert doc["config"]["eps"] == 0.25


def test_outdir_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("LIGHTCONE_OUTDIR", str(tmp_path / "envout"))
    code = cli.main(["hyperplane", "--a", "1,0,0,0", "--c", "-1",
                     "--n-theta", "48"])
    assert code == 0
    assert (tmp_path / "envout" / "hyperplane_report.json").exists()
