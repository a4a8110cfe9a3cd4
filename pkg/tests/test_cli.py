"""CLI surface: subcommands, config handling, exit codes, determinism."""

import json

from errwlab.cli import main
from errwlab.reporting import SWEEP_COLUMNS


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def test_oracle_localizes(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--alpha", "0.9",
                           "--rho", "1.5")
    assert code == 0
    assert out.startswith("Localizes [")


def test_oracle_recurrent_and_unknown(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--alpha", "0.9",
                           "--rho", "0.05")
    assert code == 0 and out.startswith("Recurrent [")
    code, out, _ = run_cli(capsys, "oracle", "--alpha", "0.75",
                           "--rho", "0.3")
    assert code == 0 and out.startswith("Unknown [")


def test_oracle_out_of_box_routes_to_series_table(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--alpha", "1.2", "--rho", "0")
    assert code == 0
    assert out.startswith("Transient [series table")


def test_oracle_scheme_classification(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--scheme", "davis-example")
    assert code == 0
    assert out.startswith("Unknown [")
    assert "mixed behaviour possible" in out


def test_oracle_enumerate_with_urn_check(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--scheme", "power-dt",
                           "--alpha", "1", "--rho", "1",
                           "--enumerate", "2", "--check-urn")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "Transient [square-summable factor: height " \
                       "martingale bounded in L2]"
    assert lines[1] == "path,probability"
    assert "0-1-0,0.333333333333" in lines
    assert "0-1-2,0.666666666667" in lines


def test_oracle_without_request_is_config_error(capsys):
    code, _, err = run_cli(capsys, "oracle")
    assert code == 1
    assert "error" in err


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_writes_jsonl_with_aggregate(tmp_path, capsys):
    out = tmp_path / "runs.jsonl"
    code, stdout, _ = run_cli(
        capsys, "simulate", "--scheme", "davis-example",
        "--stop", "escape:2,visits:100", "--runs", "50", "--seed", "7",
        "--horizon", "100000", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# errwlab")
    records = [json.loads(line) for line in lines[1:]]
    assert len(records) == 51
    assert all(r["stop_reason"] in ("escape", "visits")
               for r in records[:-1])
    agg = records[-1]
    assert agg["aggregate"] is True
    assert agg["stopped_escape"] + agg["stopped_visits"] == 50
    assert "visits_fraction" in stdout


def test_simulate_rejects_zero_horizon(tmp_path, capsys):
    code, _, err = run_cli(capsys, "simulate", "--horizon", "0",
                           "--out", str(tmp_path / "x.jsonl"))
    assert code == 1
    assert "horizon" in err


def test_simulate_trajectory_and_diagnostics_dumps(tmp_path, capsys):
    traj = tmp_path / "traj.csv"
    diag = tmp_path / "diag.csv"
    code, _, _ = run_cli(
        capsys, "simulate", "--scheme", "power-dt", "--horizon", "500",
        "--runs", "1", "--seed", "3", "--out", str(tmp_path / "r.jsonl"),
        "--trajectory", str(traj), "--diagnostics", str(diag),
        "--stride", "1")
    assert code == 0
    tl = traj.read_text().splitlines()
    assert tl[1] == "step,position"
    assert tl[2] == "0,0"
    assert tl[3] == "1,1"
    assert len(tl) == 503
    dl = diag.read_text().splitlines()
    assert dl[1] == "n,M,Theta,S2"
    assert len(dl) == 502


def test_simulate_unknown_stop_rule(capsys, tmp_path):
    code, _, err = run_cli(capsys, "simulate", "--stop", "bogus:3",
                           "--out", str(tmp_path / "x.jsonl"))
    assert code == 1


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def test_sweep_csv_header_and_determinism(tmp_path, capsys):
    out1 = tmp_path / "s1.csv"
    out2 = tmp_path / "s2.csv"
    argv = ["sweep", "--alphas", "0.9", "--rhos", "0.4,1.5", "--runs", "3",
            "--horizon", "5000", "--seed", "11"]
    assert run_cli(capsys, *argv, "--out", str(out1))[0] == 0
    assert run_cli(capsys, *argv, "--out", str(out2))[0] == 0
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2
    lines = out1.read_text().splitlines()
    assert lines[1] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 4


def test_sweep_rejects_alpha_outside_box(tmp_path, capsys):
    code, _, err = run_cli(capsys, "sweep", "--alphas", "0.4",
                           "--rhos", "0.1", "--runs", "1",
                           "--horizon", "100", "--seed", "0",
                           "--out", str(tmp_path / "s.csv"))
    assert code == 1


def test_sweep_range_syntax(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run_cli(capsys, "sweep", "--alphas", "0.8:0.9:0.1",
                         "--rhos", "0.2", "--runs", "1", "--horizon", "200",
                         "--seed", "0", "--out", str(out))
    assert code == 0
    assert len(out.read_text().splitlines()) == 4  # header + 2 cells


def test_sweep_figure(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run_cli(capsys, "sweep", "--alphas", "0.9", "--rhos",
                         "1.5", "--runs", "2", "--horizon", "2000",
                         "--seed", "1", "--out", str(out), "--figures")
    assert code == 0
    assert (tmp_path / "s_phase.png").exists()


# ---------------------------------------------------------------------------
# urn
# ---------------------------------------------------------------------------

def test_urn_summary_and_samples(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, stdout, _ = run_cli(
        capsys, "urn", "--gammas", "1.5", "--rhos", "0.5", "--ns", "10",
        "--samples", "500", "--seed", "2", "--method", "both",
        "--out", str(out), "--dump-samples")
    assert code == 0
    summary = (tmp_path / "b_summary.csv").read_text().splitlines()
    assert summary[1] == ("gamma,rho,n,method,samples,mean_b_star,"
                          "lemma_bound_c10,within_bound,censored_count")
    assert len(summary) == 4  # two methods
    samples = out.read_text().splitlines()
    assert samples[1] == "gamma,rho,n,b_star,h,censored"
    assert len(samples) == 2 + 2 * 500
    row = samples[2].split(",")
    assert row[0] == "1.5" and row[5] == "false"
    # h = n - 1 + b* - 1
    assert int(row[4]) == 10 - 1 + int(row[3]) - 1


def test_urn_rejects_bad_method(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "urn", "--method", "magic",
                         "--out", str(tmp_path / "b.csv"))
    assert code == 1


def test_urn_rejects_rho_at_one(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "urn", "--rhos", "1.0",
                         "--out", str(tmp_path / "b.csv"))
    assert code == 1


# ---------------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------------

def test_diagnose_outputs(tmp_path, capsys):
    code, stdout, _ = run_cli(capsys, "--out-dir", str(tmp_path),
                              "diagnose", "--scheme", "power-dt",
                              "--horizon", "2000", "--seed", "3",
                              "--series-stride", "10", "--figures")
    assert code == 0
    diag = (tmp_path / "diagnostics.csv").read_text().splitlines()
    assert diag[1] == "n,M,Theta,S2"
    assert len(diag) == 202
    n_lines = (tmp_path / "downcrossings.csv").read_text().splitlines()
    assert n_lines[1] == "x,N"
    assert (tmp_path / "downcrossings_unconditional.csv").exists()
    assert (tmp_path / "traces.png").exists()
    assert "proof series" in stdout


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------

def test_calibrate_best_effort_writes_json(tmp_path, capsys):
    out = tmp_path / "thr.json"
    code, stdout, _ = run_cli(
        capsys, "calibrate", "--pilot", "0.9:1.5", "--runs", "4",
        "--horizon", "50000", "--seed", "5", "--out", str(out),
        "--best-effort")
    assert code == 0
    payload = json.loads(out.read_text())
    assert set(payload["thresholds"]) == {"window_fraction",
                                          "escape_fraction", "min_drift"}
    assert "0.9:1.5" in payload["per_point"]


def test_calibrate_failure_exit_code(tmp_path, capsys):
    # two contradictory transient/recurrent pilots at a tiny horizon
    code, _, err = run_cli(
        capsys, "calibrate", "--pilot", "0.9:0.05,0.9:0.6", "--runs", "4",
        "--horizon", "2000", "--seed", "5",
        "--out", str(tmp_path / "thr.json"))
    assert code == 2
    assert "calibration failure" in err


def test_calibrate_bad_pilot_spec(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "calibrate", "--pilot", "0.9",
                         "--out", str(tmp_path / "thr.json"))
    assert code == 1


# ---------------------------------------------------------------------------
# config files and global behaviour
# ---------------------------------------------------------------------------

def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "lab.ini"
    cfg.write_text("[scheme]\nname = davis-example\n\n"
                   "[run]\nhorizon = 300\nruns = 2\nseed = 9\n")
    out = tmp_path / "r.jsonl"
    code, _, _ = run_cli(capsys, "--config", str(cfg), "simulate",
                         "--out", str(out))
    assert code == 0
    rec = json.loads(out.read_text().splitlines()[1])
    assert rec["horizon"] == 300 and rec["seed"] == 9


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "lab.ini"
    cfg.write_text("[run]\nhorizon = 300\n")
    out = tmp_path / "r.jsonl"
    code, _, _ = run_cli(capsys, "--config", str(cfg), "simulate",
                         "--horizon", "100", "--runs", "1",
                         "--out", str(out))
    assert code == 0
    rec = json.loads(out.read_text().splitlines()[1])
    assert rec["horizon"] == 100


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "lab.ini"
    cfg.write_text("[run]\nhorizzon = 300\n")
    code, _, err = run_cli(capsys, "--config", str(cfg), "simulate")
    assert code == 1
    assert "horizzon" in err


def test_unknown_config_section_rejected(tmp_path, capsys):
    cfg = tmp_path / "lab.ini"
    cfg.write_text("[walks]\nhorizon = 300\n")
    code, _, _ = run_cli(capsys, "--config", str(cfg), "simulate")
    assert code == 1


def test_missing_config_file(capsys):
    code, _, _ = run_cli(capsys, "--config", "/nonexistent.ini", "simulate")
    assert code == 1


def test_unknown_subcommand_is_config_error(capsys):
    code, _, _ = run_cli(capsys, "frobnicate")
    assert code == 1


def test_outdir_env_variable(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ERRWLAB_OUTDIR", str(tmp_path))
    code, _, _ = run_cli(capsys, "simulate", "--scheme", "davis-example",
                         "--horizon", "100", "--runs", "1", "--seed", "0")
    assert code == 0
    assert (tmp_path / "simulate.jsonl").exists()


def test_help_exits_zero(capsys):
    assert run_cli(capsys, "--help")[0] == 0
