import csv
import io
import math
import os
from contextlib import redirect_stdout

import pytest

from fixtures_table1 import TABLE1
from whlkit.cli import main


def run_cli(argv, capsys=None):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_input(tmp_path, rows, header="value,weight", name="in.csv"):
    path = tmp_path / name
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return str(path)


class TestEstimate:
    def test_two_point_sample(self, tmp_path):
        path = write_input(tmp_path, ["0,0.9", "10,0.1"])
        code, out = run_cli(["estimate", path])
        assert code == 0
        rows = {(r["estimator"], r["scheme"]): r["estimate"] for r in parse_csv(out)}
        assert len(rows) == 13
        assert float(rows[("whl1", "strict")]) == 1.0
        assert float(rows[("whl2", "diag")]) == 0.0

    def test_median_row(self, tmp_path):
        path = write_input(tmp_path, ["1,1", "2,1", "3,1"])
        code, out = run_cli(["estimate", path])
        assert code == 0
        rows = {(r["estimator"], r["scheme"]): r["estimate"] for r in parse_csv(out)}
        assert float(rows[("median", "")]) == 2.0

    def test_empty_file_exit_2(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        assert main(["estimate", str(path)]) == 2

    def test_bad_header_exit_2(self, tmp_path):
        path = write_input(tmp_path, ["1,1"], header="val,wt")
        assert main(["estimate", path]) == 2

    def test_negative_weight_exit_2_with_line_number(self, tmp_path, capsys):
        path = write_input(tmp_path, ["1,1", "2,-3"])
        assert main(["estimate", path]) == 2
        assert ":3:" in capsys.readouterr().err

    def test_non_numeric_exit_2(self, tmp_path):
        path = write_input(tmp_path, ["1,abc"])
        assert main(["estimate", path]) == 2

    def test_single_observation_emits_nan_for_strict(self, tmp_path):
        path = write_input(tmp_path, ["5,2"])
        code, out = run_cli(["estimate", path])
        assert code == 0
        rows = {(r["estimator"], r["scheme"]): r["estimate"] for r in parse_csv(out)}
        assert math.isnan(float(rows[("whl1", "strict")]))
        assert float(rows[("hl", "diag")]) == 5.0

    def test_out_flag_writes_file(self, tmp_path):
        path = write_input(tmp_path, ["1,1", "2,1"])
        out_path = tmp_path / "res.csv"
        assert main(["estimate", path, "--out", str(out_path)]) == 0
        assert out_path.read_text().startswith("# whlkit estimate")


class TestPairs:
    def test_row_major_dump(self, tmp_path):
        path = write_input(tmp_path, ["0,0.9", "10,0.1"])
        code, out = run_cli(["pairs", path, "--scheme", "diag"])
        assert code == 0
        rows = parse_csv(out)
        assert [(r["i"], r["j"]) for r in rows] == [("0", "0"), ("0", "1"), ("1", "1")]
        assert [float(r["value"]) for r in rows] == [0.0, 1.0, 10.0]


class TestBreakdown:
    def test_table_values_n20(self):
        code, out = run_cli(["breakdown", "--n-max", "20"])
        assert code == 0
        rows = parse_csv(out)
        assert len(rows) == 20
        for row, ref in zip(rows, TABLE1):
            n, med, strict, diag, alls = ref
            assert int(row["n"]) == n
            assert round(float(row["bp_median"]), 3) == med
            assert int(row["pairs_strict"]) == strict[0]
            assert round(float(row["bp_whl1_strict"]), 3) == strict[1]
            assert int(row["pairs_diag"]) == diag[0]
            assert round(float(row["bp_whl1_diag"]), 3) == diag[1]
            assert int(row["pairs_all"]) == alls[0]
            assert round(float(row["bp_whl1_all"]), 3) == alls[1]

    def test_n_max_1_single_row(self):
        code, out = run_cli(["breakdown", "--n-max", "1"])
        rows = parse_csv(out)
        assert code == 0 and len(rows) == 1
        assert rows[0]["pairs_strict"] == "0"
        assert rows[0]["whl2_lower_strict"] == "nan"

    def test_csv_family_negative_weight_exit_2(self, tmp_path):
        path = write_input(tmp_path, ["1,0.5", "1,-1"])
        assert main(["breakdown", "--family", "csv", "--weights", path]) == 2

    def test_csv_family_single_row(self, tmp_path):
        path = write_input(tmp_path, ["0,1", "0,2", "0,3"])
        code, out = run_cli(["breakdown", "--family", "csv", "--weights", path])
        rows = parse_csv(out)
        assert code == 0 and len(rows) == 1 and rows[0]["n"] == "3"

    def test_n_max_out_of_range_exit_2(self):
        assert main(["breakdown", "--n-max", "300"]) == 2

    def test_gnuplot_requires_out(self):
        assert main(["breakdown", "--n-max", "3", "--gnuplot"]) == 2

    def test_gnuplot_script_written(self, tmp_path):
        out_path = tmp_path / "bp.csv"
        assert main(["breakdown", "--n-max", "3", "--out", str(out_path), "--gnuplot"]) == 0
        assert (tmp_path / "bp.csv.gp").read_text().startswith("set datafile separator comma")

    def test_arith_sweep_n3(self):
        code, out = run_cli(["breakdown", "--n-max", "3", "--family", "arith"])
        rows = parse_csv(out)
        assert code == 0
        assert round(float(rows[2]["wm_lower"]), 3) == 0.333
        assert round(float(rows[2]["wm_upper"]), 3) == 0.667


class TestSimulate:
    def test_unknown_sample_exit_2(self):
        assert main(["simulate", "--sample", "9", "--reps", "10"]) == 2

    def test_zero_reps_exit_2(self):
        assert main(["simulate", "--sample", "1", "--reps", "0"]) == 2

    def test_row_structure(self):
        code, out = run_cli(
            ["simulate", "--sample", "2", "--n-min", "3", "--n-max", "4", "--reps", "50"]
        )
        assert code == 0
        rows = parse_csv(out)
        assert len(rows) == 2 * 8  # two sizes x (wm, wmd, whl1 x3, whl2 x3)
        assert {r["n"] for r in rows} == {"3", "4"}

    def test_scheme_flag_limits_roster(self):
        code, out = run_cli(
            ["simulate", "--sample", "2", "--n-min", "3", "--n-max", "3", "--reps", "50", "--scheme", "strict"]
        )
        rows = parse_csv(out)
        assert code == 0 and len(rows) == 4

    def test_sample1_theta_and_var(self):
        code, out = run_cli(["simulate", "--sample", "1", "--reps", "100"])
        rows = parse_csv(out)
        assert code == 0
        assert all(float(r["theta"]) == 2.0 and float(r["var_theta"]) == 15.0 for r in rows)

    def test_spec_csv(self, tmp_path):
        path = write_input(tmp_path, ["1,1,1", "2,1,1"], header="mu,sigma,weight", name="spec.csv")
        code, out = run_cli(["simulate", "--spec", path, "--reps", "50"])
        rows = parse_csv(out)
        assert code == 0 and len(rows) == 8 and rows[0]["n"] == "2"

    def test_env_seed_and_flag_priority(self, tmp_path, monkeypatch):
        monkeypatch.setenv("WHL_SEED", "777")
        _, out_env = run_cli(["simulate", "--sample", "1", "--reps", "50"])
        assert parse_csv(out_env)[0]["seed"] == "777"
        _, out_flag = run_cli(["simulate", "--sample", "1", "--reps", "50", "--seed", "42"])
        assert parse_csv(out_flag)[0]["seed"] == "42"
        monkeypatch.setenv("WHL_SEED", "not-an-int")
        assert main(["simulate", "--sample", "1", "--reps", "50"]) == 2


class TestSensitivity:
    def test_case_13_exit_2(self):
        assert main(["sensitivity", "--case", "13", "--reps", "10"]) == 2

    def test_grid_outside_range_exit_2(self):
        assert main(["sensitivity", "--case", "1", "--grid", "0,0.3", "--reps", "10"]) == 2

    def test_bad_grid_exit_2(self):
        assert main(["sensitivity", "--case", "1", "--grid", "0,x", "--reps", "10"]) == 2

    def test_row_structure_and_metadata(self):
        code, out = run_cli(["sensitivity", "--case", "4", "--grid", "0,0.1", "--reps", "20"])
        assert code == 0
        meta = [ln for ln in out.splitlines() if ln.startswith("#")]
        assert any("contamination=" in ln for ln in meta)
        assert any("rng=" in ln for ln in meta)
        rows = parse_csv(out)
        assert len(rows) == 2 * 10  # wm + (hl, whl1, whl2) x 3 schemes
        assert {r["proportion"] for r in rows} == {"0", "0.1"}

    def test_worker_determinism_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["sensitivity", "--case", "2", "--grid", "0,0.2", "--reps", "24", "--seed", "5"]
        assert main(argv + ["--out", str(a), "--workers", "1"]) == 0
        assert main(argv + ["--out", str(b), "--workers", "3"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_gnuplot_script(self, tmp_path):
        out_path = tmp_path / "sens.csv"
        code = main(
            ["sensitivity", "--case", "1", "--grid", "0", "--reps", "10", "--out", str(out_path), "--gnuplot"]
        )
        assert code == 0
        assert "weighted_mean" in (tmp_path / "sens.csv.gp").read_text()


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
