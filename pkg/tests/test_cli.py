import json

import numpy as np
import pytest

from noncolbm import cli, densities


def run(argv):
    return cli.main(argv)


def read_csv(path):
    header = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    columns = body[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in body[1:]])
    return comments, columns, data


class TestSimulate:
    def test_dyson_deterministic_bytes(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for out in (a, b):
            assert run(["simulate", "--model", "dyson", "--n", "2",
                        "--steps", "32", "--reps", "2", "--seed", "5",
                        "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_different_seed_different_output(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        run(["simulate", "--model", "dyson", "--n", "2", "--steps", "32",
             "--seed", "5", "--out", str(a)])
        run(["simulate", "--model", "dyson", "--n", "2", "--steps", "32",
             "--seed", "6", "--out", str(b)])
        assert a.read_bytes() != b.read_bytes()

    def test_header_echoes_config_and_digest(self, tmp_path):
        out = tmp_path / "o.csv"
        run(["simulate", "--model", "goe", "--n", "2", "--steps", "8",
             "--seed", "1", "--out", str(out)])
        comments, _, _ = read_csv(out)
        assert comments[0].startswith("# config ")
        cfg = json.loads(comments[0][len("# config "):])
        assert cfg["seed"] == 1 and cfg["model"] == "goe"
        assert comments[1].startswith("# digest ")

    def test_xit_final_row_real(self, tmp_path):
        out = tmp_path / "o.csv"
        run(["simulate", "--model", "xit", "--n", "2", "--steps", "16",
             "--horizon", "1.0", "--seed", "2", "--out", str(out)])
        _, columns, data = read_csv(out)
        im_cols = [k for k, c in enumerate(columns) if c.startswith("im")]
        assert np.abs(data[-1, im_cols]).max() == 0.0

    def test_noncolliding_columns(self, tmp_path):
        out = tmp_path / "o.csv"
        run(["simulate", "--model", "noncolliding", "--n", "3",
             "--steps", "64", "--seed", "3", "--out", str(out)])
        _, columns, data = read_csv(out)
        assert columns == ["time", "x1", "x2", "x3"]
        assert np.all(np.diff(data[1:, 1:], axis=1) > 0)


class TestDensity:
    def test_f_matches_library(self, capsys):
        assert run(["density", "--name", "f", "--t", "1.0",
                    "--x", "0,2", "--y", "0,2"]) == 0
        line = capsys.readouterr().out.strip().splitlines()[-1]
        val = float(line.split(",")[-1])
        assert val == pytest.approx(
            densities.transition_density(1.0, [0, 2], [0, 2]))

    def test_survival_montecarlo_reports_se(self, capsys):
        assert run(["density", "--name", "survival", "--method",
                    "montecarlo", "--t", "1.0", "--x", "0,2",
                    "--seed", "4"]) == 0
        line = capsys.readouterr().out.strip().splitlines()[-1]
        vals = [float(v) for v in line.split(",")]
        mean, se = vals[-2], vals[-1]
        assert se > 0
        assert abs(mean - densities.survival_pfaffian(1.0, [0, 2])) <= 4 * se

    def test_multiple_points(self, capsys):
        assert run(["density", "--name", "survival", "--t", "1.0",
                    "--x", "0,2;0,3"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) >= 3  # seed line + two rows

    def test_invalid_point_exits_nonzero(self, capsys):
        assert run(["density", "--name", "survival", "--t", "1.0",
                    "--x", "2,0"]) == 2


class TestVerify:
    def test_hc_suite_exit_zero_and_schema(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert run(["verify", "hc", "--samples", "20000", "--seed", "11",
                    "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["schema_version"] == 1
        assert report["passed"] is True
        assert report["config"]["suite"] == "hc"
        for t in report["tests"]:
            assert {"name", "pass"} <= set(t)

    def test_unknown_suite_exit_two(self, capsys):
        with pytest.raises(SystemExit):
            run(["verify", "nosuch"])


class TestConfigPrecedence:
    def test_config_file_supplies_defaults(self, tmp_path):
        cfgfile = tmp_path / "cfg"
        cfgfile.write_text("n = 3\nsteps = 8\nseed = 9\n")
        out = tmp_path / "o.csv"
        run(["--config", str(cfgfile), "simulate", "--model", "dyson",
             "--out", str(out)])
        _, columns, _ = read_csv(out)
        assert columns == ["time", "x1", "x2", "x3"]

    def test_flag_overrides_config(self, tmp_path):
        cfgfile = tmp_path / "cfg"
        cfgfile.write_text("n = 3\nsteps = 8\nseed = 9\n")
        out = tmp_path / "o.csv"
        run(["--config", str(cfgfile), "simulate", "--model", "dyson",
             "--n", "2", "--out", str(out)])
        _, columns, _ = read_csv(out)
        assert columns == ["time", "x1", "x2"]

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("NONCOLBM_SEED", "123")
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for out in (a, b):
            run(["simulate", "--model", "dyson", "--n", "2", "--steps",
                 "16", "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()
