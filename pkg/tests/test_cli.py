import csv
import io
import json
import os
import subprocess
import sys

import pytest

from periodic_curves import __version__
from periodic_curves.cli import (
    EXIT_FAIL, EXIT_FORMULA, EXIT_OK, EXIT_USAGE, RunConfig, UsageError, combine_codes,
    config_from_args, main, run,
)


def run_args(*argv):
    code, text = run(config_from_args(list(argv)))
    return code, text


def result(text):
    doc = json.loads(text)
    assert doc["version"] == __version__
    return doc["result"]


def test_counts_p6():
    code, text = run_args("counts", "--p", "6")
    assert code == EXIT_OK
    row, = result(text)["counts"]
    assert row["eta_prime"] == "27" and row["variant"] == "kmod"


def test_counts_range_and_csv():
    code, text = run_args("counts", "--p-range", "1..8", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == EXIT_OK and [r["p"] for r in rows] == [str(p) for p in range(1, 9)]
    assert rows[2]["eta_prime"] == "3"


def test_counts_oracle_variant():
    code, text = run_args("counts", "--p", "4", "--variant", "oracle-calibrated")
    row, = result(text)["counts"]
    assert code == EXIT_OK and row["chi"] == "-2"


def test_gleason_command():
    code, text = run_args("gleason", "--p-range", "1..6")
    recs = result(text)["gleason"]
    assert code == EXIT_OK and all(r["roots_match"] for r in recs)
    assert recs[2]["coefficients"] == ["1", "2", "1", "1"]


def test_branches_and_main_lemma():
    code, text = run_args("branches", "--p", "4")
    rec, = result(text)["branches"]
    assert code == EXIT_OK and rec["mu_sums"] == {"L+": 2, "L-": 2}
    code, text = run_args("verify-main-lemma", "--p", "3")
    rec, = result(text)["main_lemma"]
    assert code == EXIT_OK and [e["main_lemma_ok"] for e in rec["entries"]] == [True, True]


def test_euler_exit_codes():
    code, text = run_args("euler", "--p", "3")
    assert code == EXIT_OK
    rep, = result(text)["euler"]
    assert rep["chi_geometric"] == "0" and rep["selected_variant"] == "oracle-calibrated"
    code, _ = run_args("euler", "--p", "3", "--variant", "kmod")
    assert code == EXIT_FORMULA


def test_centers_and_rescale():
    code, text = run_args("centers", "--p", "3")
    rec, = result(text)["centers"]
    assert code == EXIT_OK and rec["count"] == 2
    code, text = run_args("rescale", "--p", "3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == EXIT_OK and len(rows) == 2 and all(r["ok"] == "True" for r in rows)


def test_cache_hit_matches_cold_run(tmp_path):
    args = ["euler", "--p", "4", "--cache-dir", str(tmp_path)]
    cold = run_args(*args)
    assert any(f.endswith(".json") for f in os.listdir(tmp_path))
    warm = run_args(*args)
    plain = run_args("euler", "--p", "4")
    assert cold == warm == plain


def test_out_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["counts", "--p", "5", "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["command"] == "counts"


@pytest.mark.parametrize("argv", [
    ["counts"],
    ["counts", "--p", "3", "--p-range", "3..4"],
    ["counts", "--p-range", "5..3"],
    ["counts", "--p-range", "x"],
    ["euler", "--p", "2"],
    ["counts", "--p", "3", "--jobs", "zero"],
    ["counts", "--p", "3", "--jobs", "0"],
    ["counts", "--p", "3", "--trunc", "2"],
    ["counts", "--p", "3", "--precision", "20"],
    ["counts", "--p", "3", "--tol", "2"],
])
def test_usage_errors_exit_64(argv):
    assert main(argv) == EXIT_USAGE


def test_parser_errors_exit_64():
    with pytest.raises(SystemExit) as exc:
        config_from_args(["nonsense", "--p", "3"])
    assert exc.value.code == EXIT_USAGE


def test_runconfig_validation():
    with pytest.raises(UsageError):
        RunConfig("counts", ()).validate()
    cfg = RunConfig("counts", (3,), precision_bits=200)
    assert cfg.dps >= 80 and cfg.trunc(3) == 24


def test_computation_error_is_reported():
    cfg = RunConfig("counts", (3,), variant=None)
    object.__setattr__(cfg, "command", "branches")
    object.__setattr__(cfg, "periods", (1,))
    code, text = run(cfg)
    assert code == EXIT_FAIL and "error" in json.loads(text)


def test_combine_codes():
    assert combine_codes(0, 0) == 0
    assert combine_codes(0, 2) == 2
    assert combine_codes(2, 1, 0) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "periodic_curves", "counts", "--p", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["command"] == "counts"
    proc = subprocess.run([sys.executable, "-m", "periodic_curves", "--version"],
                          capture_output=True, text=True, check=False)
    assert proc.stdout.strip() == __version__
