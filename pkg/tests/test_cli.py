"""Command-line surface: schemas, exit codes, manifests, reproducibility."""

import json
from pathlib import Path

import numpy as np
import pytest

from josephus import dp
from josephus.cli import main
from josephus.io import file_sha256


def run_ok(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    assert code == 0, out
    return out


def test_det_single_value(capsys):
    assert run_ok(["det", "--n", "41"], capsys).strip() == "19"


def test_det_range_csv(capsys):
    out = run_ok(["det", "--n-range", "1:6"], capsys)
    lines = out.strip().splitlines()
    assert lines[0] == "N,b_N"
    assert lines[1] == "1,1"
    assert lines[6] == "6,5"


def test_det_series_check(capsys):
    out = run_ok(["det", "--series-check", "128"], capsys)
    assert "OK" in out


def test_det_requires_a_mode():
    assert main(["det"]) == 2


def test_exact_csv_schema(capsys):
    out = run_ok(["exact", "--rule", "r1", "--n", "4", "--p", "0.5"], capsys)
    lines = out.strip().splitlines()
    assert lines[0] == "n,prob"
    assert lines[1:] == ["0,0.5", "1,0.25", "2,0", "3,0.25"]


def test_exact_seventeen_digit_floats(capsys):
    out = run_ok(["exact", "--rule", "r1", "--n", "3", "--p", str(1 / 3)], capsys)
    value = out.strip().splitlines()[-1].split(",")[1]
    assert float(value) == 1 / 3
    assert len(value) >= 17


def test_exact_r1u_matches_explicit_half(capsys):
    a = run_ok(["exact", "--rule", "r1u", "--n", "9"], capsys)
    b = run_ok(["exact", "--rule", "r1", "--n", "9", "--p", "0.5"], capsys)
    assert a == b


def test_exact_domain_error_exit_code():
    assert main(["exact", "--rule", "r1", "--n", "2", "--p", "0.5"]) == 2
    assert main(["exact", "--rule", "r1", "--n", "5", "--p", "1.5"]) == 2
    assert main(["exact", "--rule", "r3", "--n", "5", "--p", "0.5"]) == 2


def test_exact_literal_recursion_refused():
    assert main(["exact", "--rule", "r2", "--n", "5", "--p", "0.4",
                 "--literal-recursion"]) == 2


def test_oracle_rational_csv(capsys):
    out = run_ok(["oracle", "--rule", "r1", "--n", "3", "--p-num", "3", "--p-den", "10"],
                 capsys)
    lines = out.strip().splitlines()
    assert lines[0] == "n,num,den"
    assert lines[1:] == ["0,0,1", "1,7,10", "2,3,10"]


def test_oracle_cap_is_domain_error():
    assert main(["oracle", "--rule", "r1", "--n", "30", "--p-num", "1", "--p-den", "2"]) == 2


def test_simulate_counts(tmp_path, capsys):
    out = run_ok(["--out", str(tmp_path), "--seed", "5", "simulate", "--rule", "r2",
                  "--n", "12", "--p", "0.4", "--samples", "400"], capsys)
    path = tmp_path / "simulate_r2_n12_s400_seed5.csv"
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "n,count,freq"
    counts = [int(r.split(",")[1]) for r in rows[1:]]
    assert sum(counts) == 400


def test_moments_csv(tmp_path, capsys):
    run_ok(["--out", str(tmp_path), "moments", "--rule", "r1u", "--n-max", "50"], capsys)
    rows = (tmp_path / "moments_r1u_n3_50.csv").read_text().strip().splitlines()
    assert rows[0].split(",")[:4] == ["n", "mean", "phi1", "phi2"]
    assert len(rows) == 49


def test_decay_command(tmp_path, capsys):
    run_ok(["--out", str(tmp_path), "decay", "--p", "0.5", "--n-max", "200"], capsys)
    rec = json.loads((tmp_path / "decay.jsonl").read_text())
    assert rec["gamma"] > 1
    assert rec["k"] >= 1


def test_decay_unbiased_infeasible_alpha_is_domain_error():
    assert main(["decay", "--unbiased", "--epsilon", "0.05", "--alpha", "1.2",
                 "--n-max", "50"]) == 2


def test_decay_unstabilized_fit_exits_three(tmp_path):
    # over a range this short the fitted constant is still growing
    assert main(["--out", str(tmp_path), "decay", "--p", "0.5", "--n-max", "6"]) == 3


def test_clt_command(tmp_path, capsys):
    run_ok(["--out", str(tmp_path), "--seed", "3", "clt", "--l-max", "200",
            "--trials", "1000"], capsys)
    lines = (tmp_path / "clt_L200_T1000.jsonl").read_text().strip().splitlines()
    ensemble = json.loads(lines[-1])
    assert ensemble["trials"] == 1000
    assert len(ensemble["normalized_sums"]) == 1000
    per_l = [json.loads(l) for l in lines[:-1]]
    b = [r["b_l"] for r in per_l]
    assert b == sorted(b)


def test_figure_r1_and_manifest(tmp_path, capsys):
    run_ok(["--out", str(tmp_path), "figure", "r1", "--n", "40",
            "--p-grid", "0.5,1"], capsys)
    manifest = json.loads((tmp_path / "figure_r1.manifest.json").read_text())
    assert manifest["config"]["command"] == "figure"
    assert len(manifest["files"]) == 2
    assert manifest["hash"]
    point_mass = (tmp_path / "fig_r1_n40_p1.csv").read_text()
    assert point_mass.startswith("n,prob\n")
    probs = [float(r.split(",")[1]) for r in point_mass.strip().splitlines()[1:]]
    assert max(probs) == 1.0 and sum(probs) == 1.0


def test_figure_r2_unbiased_file_matches_r1(tmp_path, capsys):
    run_ok(["--out", str(tmp_path), "figure", "r1", "--n", "60", "--p-grid", "0.5"], capsys)
    run_ok(["--out", str(tmp_path), "figure", "r2", "--n", "60", "--p-grid", "0.5"], capsys)
    a = np.loadtxt(tmp_path / "fig_r1_n60_p0.5.csv", delimiter=",", skiprows=1)
    b = np.loadtxt(tmp_path / "fig_r2_n60_p0.5.csv", delimiter=",", skiprows=1)
    assert np.abs(a[:, 1] - b[:, 1]).max() <= 1e-12


def test_figure_r3_grid(tmp_path, capsys):
    run_ok(["--out", str(tmp_path), "figure", "r3", "--n", "30",
            "--p-grid", "0.5,1", "--q-grid", "1"], capsys)
    manifest = json.loads((tmp_path / "figure_r3.manifest.json").read_text())
    assert len(manifest["files"]) == 2
    probs = np.loadtxt(tmp_path / "fig_r3_n30_p1_q1.csv", delimiter=",", skiprows=1)[:, 1]
    assert probs.max() == 1.0


def test_figure_threads_match_sequential(tmp_path, capsys):
    seq = tmp_path / "seq"
    par = tmp_path / "par"
    run_ok(["--out", str(seq), "figure", "r1", "--n", "50",
            "--p-grid", "0.2,0.4,0.6"], capsys)
    run_ok(["--out", str(par), "--threads", "3", "figure", "r1", "--n", "50",
            "--p-grid", "0.2,0.4,0.6"], capsys)
    for name in ("fig_r1_n50_p0.2.csv", "fig_r1_n50_p0.4.csv", "fig_r1_n50_p0.6.csv"):
        assert (seq / name).read_bytes() == (par / name).read_bytes()


def test_global_format_jsonl_for_tabular_commands(tmp_path, capsys):
    out = run_ok(["--format", "jsonl", "exact", "--rule", "r1", "--n", "4",
                  "--p", "0.5"], capsys)
    records = [json.loads(l) for l in out.strip().splitlines()]
    assert records[0] == {"n": 0, "prob": 0.5}
    assert [r["prob"] for r in records] == [0.5, 0.25, 0.0, 0.25]
    run_ok(["--out", str(tmp_path), "--format", "jsonl", "det", "--n-range", "1:4"],
           capsys)
    rows = [json.loads(l) for l in (tmp_path / "det_1_4.jsonl").read_text().splitlines()]
    assert rows == [{"N": 1, "b_N": 1}, {"N": 2, "b_N": 1},
                    {"N": 3, "b_N": 3}, {"N": 4, "b_N": 1}]


def test_figure_gnuplot_script(tmp_path, capsys):
    run_ok(["--out", str(tmp_path), "figure", "r1", "--n", "30",
            "--p-grid", "0.4,0.6", "--gnuplot"], capsys)
    script = (tmp_path / "figure_r1.gp").read_text()
    assert "fig_r1_n30_p0.4.csv" in script and "plot" in script
    manifest = json.loads((tmp_path / "figure_r1.manifest.json").read_text())
    assert any(f["name"].endswith(".gp") for f in manifest["files"])


def test_sweep_jsonl_non_assertive(tmp_path, capsys):
    run_ok(["--out", str(tmp_path), "sweep", "--p-grid", "0.5",
            "--n-list", "100,200", "--delta", "0.02"], capsys)
    records = [json.loads(l) for l in (tmp_path / "sweep.jsonl").read_text().splitlines()]
    assert all(rec["assertive"] is False for rec in records)
    by_n = {rec["n"]: rec["mass_near_half"] for rec in records}
    assert by_n[200] >= by_n[100] * 0.9  # trend is reported, not asserted


def test_rerun_reproduces_byte_identical_output(tmp_path, capsys):
    run_ok(["--out", str(tmp_path), "--seed", "11", "figure", "r1", "--n", "45",
            "--p-grid", "0.3,0.7"], capsys)
    files = ["fig_r1_n45_p0.3.csv", "fig_r1_n45_p0.7.csv"]
    before = {f: file_sha256(tmp_path / f) for f in files}
    for f in files:
        (tmp_path / f).unlink()
    run_ok(["rerun", str(tmp_path / "figure_r1.manifest.json")], capsys)
    after = {f: file_sha256(tmp_path / f) for f in files}
    assert before == after


def test_rerun_reproduces_monte_carlo_counts(tmp_path, capsys):
    args = ["--out", str(tmp_path), "--seed", "21", "simulate", "--rule", "r1",
            "--n", "25", "--p", "0.5", "--samples", "300"]
    run_ok(args, capsys)
    name = "simulate_r1_n25_s300_seed21.csv"
    first = (tmp_path / name).read_bytes()
    (tmp_path / name).unlink()
    run_ok(["rerun", str(tmp_path / f"{name[:-4]}.manifest.json")], capsys)
    assert (tmp_path / name).read_bytes() == first


def test_rerun_rejects_unknown_config_keys(tmp_path):
    manifest = tmp_path / "bad.manifest.json"
    manifest.write_text(json.dumps({
        "config": {"schema": 1, "argv": ["det", "--n", "5"], "surprise": 1},
        "files": [], "hash": "", "version": "0.1.0",
    }))
    assert main(["rerun", str(manifest)]) == 2


def test_bad_flag_is_usage_error():
    assert main(["exact", "--rule", "bogus", "--n", "5"]) == 2


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    assert "0.1.0" in capsys.readouterr().out
