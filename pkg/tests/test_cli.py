import json

import numpy as np
import pytest

from censexp.cli import main
from censexp.distributions import DistSpec, generate_censored_sample


@pytest.fixture()
def data_file(tmp_path):
    s = generate_censored_sample(DistSpec("exp"), 0.2, 40, np.random.default_rng(3))
    p = tmp_path / "sample.csv"
    p.write_text(s.to_csv())
    return str(p)


@pytest.fixture()
def weibull_file(tmp_path):
    s = generate_censored_sample(DistSpec("weibull", 1.6), 0.1, 80, np.random.default_rng(4))
    p = tmp_path / "weibull.csv"
    p.write_text(s.to_csv())
    return str(p)


class TestTestVerb:
    def test_basic_run(self, data_file, capsys):
        code = main(["test", data_file, "--spec", "J:PR:a=1", "--B", "120", "--seed", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert "config:" in out and "statistic" in out and "p-value" in out

    def test_json_output(self, data_file, capsys):
        code = main(["test", data_file, "--spec", "M:D:a=1", "--B", "120", "--json"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        payload = json.loads(lines[-1])
        assert set(payload) >= {"statistic", "critical_values", "p_value", "reject"}

    def test_exit_on_reject(self, weibull_file, capsys):
        code = main(
            ["test", weibull_file, "--spec", "J:PR:a=1", "--B", "200",
             "--seed", "2", "--exit-on-reject"]
        )
        payloadless = capsys.readouterr().out
        assert "reject H0" in payloadless
        assert code == 2

    def test_malformed_csv_names_line(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("time,event\n1.0,1\n2.0,7\n")
        code = main(["test", str(p), "--B", "120"])
        assert code == 1
        assert "line 3" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["test", "/nonexistent.csv", "--B", "120"]) == 1


class TestSimulateAndReport:
    def test_end_to_end_artifacts(self, tmp_path, capsys):
        cfg = tmp_path / "study.cfg"
        cfg.write_text(
            "n = 40\nN = 100\nB = 100\nrates = 0.1\n"
            "alternatives = exp:1\nstatistics = delta\nseed = 5\n"
        )
        out_prefix = tmp_path / "tab"
        code = main(["simulate", str(cfg), "--out", str(out_prefix), "--format", "markdown"])
        assert code == 0
        assert (tmp_path / "tab.csv").exists()
        assert (tmp_path / "tab.md").exists()
        stdout = capsys.readouterr().out
        assert "config:" in stdout and "[1/1]" in stdout

        code = main(["report", str(tmp_path / "tab.csv"), "--format", "latex"])
        assert code == 0
        assert (tmp_path / "tab.tex").exists()
        figures = list(tmp_path.glob("tab_rate*.png"))
        assert len(figures) == 1 and figures[0].stat().st_size > 0

    def test_report_no_figures(self, tmp_path, capsys):
        cfg = tmp_path / "study.cfg"
        cfg.write_text(
            "n = 40\nN = 100\nB = 100\nrates = 0.1\n"
            "alternatives = exp:1\nstatistics = delta\nseed = 5\n"
        )
        main(["simulate", str(cfg), "--out", str(tmp_path / "t2")])
        capsys.readouterr()
        code = main(["report", str(tmp_path / "t2.csv"), "--no-figures"])
        assert code == 0
        assert (tmp_path / "t2.md").exists()
        assert not list(tmp_path.glob("t2_rate*.png"))

    def test_invalid_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("bogus = 1\n")
        assert main(["simulate", str(cfg)]) == 1
        assert "valid keys" in capsys.readouterr().err


class TestAsymptoticsVerb:
    def test_basic_run(self, data_file, capsys):
        code = main(["asymptotics", data_file, "--spec", "J:PR:a=1", "--eigenvalues", "4"])
        out = capsys.readouterr().out
        assert code == 0
        assert "sigma^2" in out and "eigenvalues" in out

    def test_json(self, data_file, capsys):
        code = main(["asymptotics", data_file, "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert "eigenvalues" in payload and len(payload["eigenvalues"]) == 10

    def test_rejects_non_j_spec(self, data_file, capsys):
        assert main(["asymptotics", data_file, "--spec", "cvm"]) == 1
