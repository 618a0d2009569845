import json

import numpy as np
import pytest

from fixedgp.cli import ConfigError, main, parse_config_file
from fixedgp.gp import load_dataset


TINY_CFG = """
# desk-size smoke configuration
n_samples = 300
n_burnin = 100
n_replications = 2
n_test_points = 15
n_workers = 1
"""


@pytest.fixture
def tiny_config(tmp_path):
    p = tmp_path / "tiny.cfg"
    p.write_text(TINY_CFG)
    return str(p)


class TestConfigFile:
    def test_parse_values(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("d = 2\nn_values = 25, 50\nalpha_0 = 0.7\nzero_noise = true\n"
                     "output_dir = results  # trailing comment\n")
        values = parse_config_file(p)
        assert values == {"d": 2, "n_values": (25, 50), "alpha_0": 0.7,
                          "zero_noise": True, "output_dir": "results"}

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("bogus = 1\n")
        with pytest.raises(ConfigError):
            parse_config_file(p)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            parse_config_file("/nonexistent/path.cfg")

    def test_bad_line(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("just words\n")
        with pytest.raises(ConfigError):
            parse_config_file(p)


class TestSimulate:
    def test_writes_loadable_dataset(self, tmp_path):
        out = str(tmp_path / "sim")
        code = main(["simulate", "--d", "1", "--n", "40", "--seed", "3", "--out", out])
        assert code == 0
        data = load_dataset(tmp_path / "sim" / "dataset.csv")
        assert data.n == 40 and data.design.d == 1
        meta = json.loads((tmp_path / "sim" / "dataset_manifest.json").read_text())
        assert meta["seed"] == 3

    def test_zero_noise_midpoints(self, tmp_path):
        out = str(tmp_path / "sim0")
        main(["simulate", "--n", "4", "--seed", "0", "--out", out, "--zero-noise"])
        data = load_dataset(tmp_path / "sim0" / "dataset.csv")
        assert np.allclose(data.design.coords_1d, [0.125, 0.375, 0.625, 0.875])

    def test_deterministic(self, tmp_path):
        a, b = str(tmp_path / "a"), str(tmp_path / "b")
        main(["simulate", "--n", "10", "--seed", "5", "--out", a])
        main(["simulate", "--n", "10", "--seed", "5", "--out", b])
        assert (tmp_path / "a" / "dataset.csv").read_bytes() == \
               (tmp_path / "b" / "dataset.csv").read_bytes()


class TestTables:
    def test_table1_exit_zero_and_outputs(self, tmp_path, tiny_config, capsys):
        out = str(tmp_path / "t1")
        code = main(["table1", "--config", tiny_config, "--n-values", "25",
                     "--out", out, "--fast-ou"])
        assert code == 0
        assert (tmp_path / "t1" / "table1.csv").exists()
        assert (tmp_path / "t1" / "table1_replications.csv").exists()
        assert (tmp_path / "t1" / "table1_manifest.json").exists()
        assert "e_theta" in capsys.readouterr().out

    def test_table1_dense_flag(self, tmp_path, tiny_config):
        out = str(tmp_path / "t1d")
        code = main(["table1", "--config", tiny_config, "--n-values", "25",
                     "--out", out, "--dense"])
        assert code == 0
        manifest = json.loads((tmp_path / "t1d" / "table1_manifest.json").read_text())
        assert manifest["config"]["likelihood"] == "dense"

    def test_table3_tiny(self, tmp_path, tiny_config):
        out = str(tmp_path / "t3")
        code = main(["table3", "--config", tiny_config, "--n-values", "25", "--out", out])
        assert code == 0
        header = (tmp_path / "t3" / "table3.csv").read_text().splitlines()[0]
        assert header.startswith("n,replications,max_r1")

    def test_bad_config_exit_2(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("nonsense_key = 3\n")
        code = main(["table1", "--config", str(p)])
        assert code == 2

    def test_bad_value_exit_2(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("likelihood = banana\n")
        code = main(["table1", "--config", str(p)])
        assert code == 2

    def test_failure_budget_exit_3(self, monkeypatch, tmp_path):
        from fixedgp import cli
        from fixedgp.experiments import FailureBudgetExceededError

        def boom(cfg):
            raise FailureBudgetExceededError("forced")

        monkeypatch.setattr(cli, "run_table1", boom)
        code = main(["table1", "--out", str(tmp_path)])
        assert code == 3


class TestContourCli:
    def test_from_simulated(self, tmp_path):
        out = str(tmp_path / "ct")
        code = main(["contour", "--n", "30", "--seed", "2", "--out", out,
                     "--theta-grid", "0.2:1.0:6", "--alpha-grid", "0.2:3:5"])
        assert code == 0
        lines = (tmp_path / "ct" / "contour_grid.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 6 * 5

    def test_from_dataset_file(self, tmp_path):
        sim = str(tmp_path / "sim")
        main(["simulate", "--n", "25", "--seed", "9", "--out", sim])
        out = str(tmp_path / "ct2")
        code = main(["contour", "--data", str(tmp_path / "sim" / "dataset.csv"),
                     "--out", out, "--theta-grid", "0.2:1.0:4", "--alpha-grid", "0.3:2:4"])
        assert code == 0
        assert (tmp_path / "ct2" / "contour_ridge.csv").exists()


class TestChecks:
    def test_kl_check(self, tmp_path, capsys):
        out = str(tmp_path / "kl")
        code = main(["kl-check", "--n-values", "50,100", "--alphas", "1.0",
                     "--alpha0", "0.5", "--out", out])
        assert code == 0
        content = (tmp_path / "kl" / "kl_check.csv").read_text()
        assert content.splitlines()[0] == "n,alpha,alpha0,r_n,r_limit,gap"

    def test_lambda_check(self, tmp_path):
        out = str(tmp_path / "lam")
        code = main(["lambda-check", "--count", "8", "--n", "15", "--seed", "1",
                     "--out", out])
        assert code == 0
        lines = (tmp_path / "lam" / "lambda_check.csv").read_text().strip().splitlines()
        assert len(lines) == 9
