import json

import pytest

from sphereshg.cli import main


def read(path):
    return path.read_bytes()


def summary(out, name):
    with open(out / f"{name}_summary.json") as fh:
        return json.load(fh)


class TestSelfTest:
    def test_passes(self, tmp_path):
        assert main(["selftest", "--band-limit", "12", "--out", str(tmp_path)]) == 0
        s = summary(tmp_path, "selftest")
        assert s["results"]["all_passed"]
        assert s["config"]["band_limit"] == 12
        assert (tmp_path / "selftest_table.csv").exists()


class TestEvolve:
    def test_linear_case_drifts(self, tmp_path):
        rc = main(["evolve", "--band-limit", "12", "--sigma", "1", "4",
                   "--eps1", "0", "0", "--eps2", "0", "0", "--time", "1.0",
                   "--dt", "0.02", "--seed", "7", "--out", str(tmp_path)])
        assert rc == 0
        s = summary(tmp_path, "evolve")
        assert s["results"]["mass_drift"] <= 1e-12
        assert s["results"]["energy_drift"] <= 1e-10

    def test_blowup_exit_code(self, tmp_path):
        rc = main(["evolve", "--band-limit", "8", "--sigma", "1", "4",
                   "--eps1", "30", "0", "--eps2", "-30", "0", "--h1-norm", "6",
                   "--time", "4.0", "--dt", "0.002", "--seed", "1",
                   "--out", str(tmp_path)])
        assert rc == 3

    def test_picard_solver_path(self, tmp_path):
        rc = main(["evolve", "--band-limit", "8", "--sigma", "1", "4",
                   "--h1-norm", "0.1", "--time", "0.05", "--solver", "picard",
                   "--panels", "256", "--seed", "3", "--out", str(tmp_path)])
        assert rc == 0
        assert summary(tmp_path, "evolve")["results"]["solver_meta"]["iterations"] <= 20


class TestCount:
    def test_square_validation(self, tmp_path):
        rc = main(["count", "--sigma", "2", "1", "--require-square",
                   "--dyadic-n", "1", "2", "--dyadic-l", "1",
                   "--out", str(tmp_path)])
        assert rc == 2

    def test_sweep_and_transformed(self, tmp_path):
        rc = main(["count", "--sigma", "1", "4", "--dyadic-n", "1", "2", "4",
                   "--dyadic-l", "1", "2", "--verify-transformed",
                   "--out", str(tmp_path)])
        assert rc == 0
        table = (tmp_path / "count_table.csv").read_text().splitlines()
        assert table[0] == "N,L,m_star,sup,total"
        assert len(table) == 7
        assert all(summary(tmp_path, "count")["results"]["newset_checks"].values())


class TestDeterminism:
    def test_strichartz_tables_byte_identical(self, tmp_path):
        args = ["strichartz", "--sigma", "1", "4", "--dyadic-n", "1", "2",
                "--dyadic-l", "1", "2", "--trials", "2", "--seed", "11"]
        out1, out2, out3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert read(out1 / "strichartz_table.csv") == read(out2 / "strichartz_table.csv")
        assert main(args[:-1] + ["12", "--out", str(out3)]) == 0
        assert read(out1 / "strichartz_table.csv") != read(out3 / "strichartz_table.csv")

    def test_count_tables_byte_identical(self, tmp_path):
        args = ["count", "--sigma", "9", "4", "--dyadic-n", "1", "2", "4", "8",
                "--dyadic-l", "1", "2", "4", "8"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert read(out1 / "count_table.csv") == read(out2 / "count_table.csv")


class TestGNAndBound:
    def test_gn_calibration_run(self, tmp_path):
        rc = main(["gn", "--band-limit", "10", "--trials", "30", "--seed", "5",
                   "--out", str(tmp_path)])
        assert rc == 0
        s = summary(tmp_path, "gn")
        assert s["results"]["max_ratio"] > 0
        assert s["results"]["calibrated_A"] >= 0

    def test_bound_confinement_run(self, tmp_path):
        rc = main(["bound", "--band-limit", "12", "--sigma", "1", "4",
                   "--time", "0.2", "--dt", "0.002", "--seed", "6",
                   "--sample-stride", "10", "--out", str(tmp_path)])
        assert rc == 0
        assert summary(tmp_path, "bound")["results"]["all_confined"]


class TestProjectorBilinear:
    def test_small_scan(self, tmp_path):
        rc = main(["projector-bilinear", "--degrees", "2", "4", "--trials", "5",
                   "--structured", "--seed", "2", "--out", str(tmp_path)])
        assert rc == 0
        s = summary(tmp_path, "projector_bilinear")
        assert "slope" in s["results"]
