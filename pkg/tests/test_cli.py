import csv
import io
import json
import subprocess
import sys

import pytest

from lazyrm.cli import BENCH_COLUMNS, ISTA_COLUMNS, SPECTRAL_COLUMNS, VERIFY_COLUMNS, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_ista_csv_is_reproducible(capsys):
    args = ("ista", "--n", "64", "--T", "8", "--trials", "5", "--seed", "1")
    c1, a, _ = run_cli(capsys, *args)
    c2, b, _ = run_cli(capsys, *args)
    assert c1 == c2 == 0 and a == b
    rows = parse(a)
    assert tuple(rows[0]) == ISTA_COLUMNS and len(rows) == 9
    assert [int(r["t"]) for r in rows] == list(range(9))
    assert all(float(r["mse_stderr"]) > 0 for r in rows[1:])


def test_ista_both_backends_have_equal_blocks(capsys):
    code, out, _ = run_cli(capsys, "ista", "--n", "64", "--T", "5", "--trials", "3", "--backend", "both")
    rows = parse(out)
    hd = [r for r in rows if r["backend"] == "hd"]
    direct = [r for r in rows if r["backend"] == "direct"]
    assert code == 0 and len(hd) == len(direct) == 6
    assert hd[0]["mse_mean"] != direct[0]["mse_mean"]


def test_ista_direct_cap_refused(capsys):
    code, out, err = run_cli(capsys, "ista", "--n", "100000", "--backend", "direct")
    assert code == 4 and "cap" in err and out == ""


def test_ista_budget_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "ista", "--n", "40", "--T", "50")
    assert code == 2 and "probes" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["ista", "--backend", "sideways"])
    assert info.value.code == 2
    assert run_cli(capsys, "ista", "--trials", "0")[0] == 2
    assert run_cli(capsys, "spectral", "--alpha", "0.5")[0] == 2
    assert run_cli(capsys, "bench", "--backend", "both")[0] == 2


def test_spectral_single_alpha_single_trial(capsys):
    code, out, err = run_cli(capsys, "spectral", "--n", "64", "--alpha", "2.5", "--trials", "1")
    rows = parse(out)
    assert code == 0 and tuple(rows[0]) == SPECTRAL_COLUMNS and len(rows) == 1
    assert rows[0]["rho_stderr"] == "" and 0 <= float(rows[0]["rho_mean"]) <= 1
    assert err == ""


def test_spectral_alpha_grid_and_repeat(capsys):
    args = ("spectral", "--n", "48", "--alpha", "2", "3", "--trials", "3", "--seed", "4")
    _, a, _ = run_cli(capsys, *args)
    _, b, _ = run_cli(capsys, *args)
    rows = parse(a)
    assert a == b and [float(r["alpha"]) for r in rows] == [2.0, 3.0]
    assert all(r["rho_stderr"] != "" for r in rows)


def test_spectral_not_converged_exit(capsys):
    code, _, err = run_cli(capsys, "spectral", "--n", "128", "--eigensolver", "power", "--max-matvecs", "2")
    assert code == 3 and "matvecs" in err


def test_verify_consistency_only(capsys):
    code, out, err = run_cli(capsys, "verify", "--suite", "consistency", "--seeds", "2", "--probes", "8")
    rows = parse(out)
    assert code == 0 and tuple(rows[0]) == VERIFY_COLUMNS
    assert {r["suite"] for r in rows} == {"consistency"}
    assert all(r["passed"] == "1" for r in rows) and "all" in err


def test_verify_mutation_fails_with_named_check(capsys):
    code, out, err = run_cli(capsys, "verify", "--suite", "consistency", "--seeds", "1", "--probes", "8",
                             "--mutate", "skip-reflector")
    assert code == 3 and "FAILED" in err and "span-linearity" in err
    assert any(r["passed"] == "0" for r in parse(out))


def test_verify_equivalence_only(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "equivalence", "--trials", "150")
    rows = parse(out)
    assert code == 0 and {r["suite"] for r in rows} == {"equivalence"} and len(rows) == 9
    assert all(0 <= float(r["value"]) <= 1 for r in rows)


def test_bench_smoke(capsys):
    code, out, err = run_cli(capsys, "bench", "--nmin", "256", "--nmax", "512", "--T", "3", "--repeats", "1")
    rows = parse(out)
    assert code == 0 and tuple(rows[0]) == BENCH_COLUMNS and [int(r["n"]) for r in rows] == [256, 512]
    assert "slope" in err
    code, out, err = run_cli(capsys, "bench", "--fix-n", "256", "--sweep-T", "2", "4", "--repeats", "1")
    assert code == 0 and [int(r["T"]) for r in parse(out)] == [2, 4] and "vs T" in err


def test_bench_time_budget(capsys):
    code, _, err = run_cli(capsys, "bench", "--nmin", "256", "--nmax", "256", "--T", "2", "--repeats", "1",
                           "--time-budget", "0")
    assert code == 4 and "exceeded" in err


def test_manifest_replay_round_trip(tmp_path, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    code, _, _ = run_cli(capsys, "ista", "--n", "32", "--T", "4", "--trials", "2", "--seed", "9",
                         "--out", str(first))
    assert code == 0
    man = json.loads((first / "manifest.json").read_text())
    assert man["subcommand"] == "ista" and man["seed"] == 9 and man["artifacts"] == ["ista.csv"]
    assert man["config"]["n"] == 32 and man["exit_code"] == 0
    assert run_cli(capsys, "replay", str(first / "manifest.json"), "--out", str(second))[0] == 0
    assert (first / "ista.csv").read_bytes() == (second / "ista.csv").read_bytes()


def test_replay_bad_manifest(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text("{}")
    assert run_cli(capsys, "replay", str(p))[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[ista]\nn = 32\nT = 3\ntrials = 2\nbackend = both\n")
    code, out, _ = run_cli(capsys, "ista", "--config", str(cfg))
    rows = parse(out)
    assert code == 0 and len(rows) == 8
    # explicit flags override the file
    _, out, _ = run_cli(capsys, "ista", "--config", str(cfg), "--T", "2")
    assert len(parse(out)) == 6
    cfg.write_text("[ista]\nbogus = 1\n")
    assert run_cli(capsys, "ista", "--config", str(cfg))[0] == 2
    assert run_cli(capsys, "ista", "--config", str(tmp_path / "missing.ini"))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lazyrm", "ista", "--n", "16", "--T", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("t,mse_mean")
