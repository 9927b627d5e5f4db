import os

import numpy as np
import pytest

from elastica_fem.cli import (CliConfig, UsageError, console_main, load_config,
                              main, parse_args)


class TestParseArgs:
    def test_run_with_overrides(self):
        cfg = parse_args(["run", "circle", "--constraint", "p2",
                          "--tau", "0.1"])
        assert cfg.subcommand == "run"
        assert cfg.experiment == "circle"
        assert cfg.constraint == "p2"
        assert cfg.taus == [0.1]

    def test_run_with_config_file(self):
        cfg = parse_args(["run", "--config", "oval.cfg"])
        assert cfg.config_path == "oval.cfg"
        assert cfg.experiment is None

    def test_bad_constraint_value(self):
        with pytest.raises(UsageError):
            parse_args(["run", "circle", "--constraint", "p3"])

    def test_unknown_flag(self):
        with pytest.raises(UsageError, match="frobnicate"):
            parse_args(["run", "circle", "--frobnicate"])

    def test_missing_subcommand(self):
        with pytest.raises(UsageError):
            parse_args([])

    def test_run_needs_experiment_or_config(self):
        with pytest.raises(UsageError):
            parse_args(["run"])

    def test_mesh_size_lists(self):
        cfg = parse_args(["run", "circle", "-M", "10,20,40"])
        assert cfg.mesh_sizes == [10, 20, 40]
        with pytest.raises(UsageError):
            parse_args(["run", "circle", "-M", "ten"])


class TestLoadConfig:
    def write(self, tmp_path, text):
        path = tmp_path / "exp.cfg"
        path.write_text(text)
        return str(path)

    def test_helix_with_tau(self, tmp_path):
        path = self.write(tmp_path, "experiment=helix\ntau=0.05\n")
        raw = load_config(path)
        assert raw == {"experiment": "helix", "tau": "0.05"}

    def test_missing_experiment(self, tmp_path):
        path = self.write(tmp_path, "")
        with pytest.raises(UsageError, match="missing key: experiment"):
            load_config(path)

    def test_duplicate_key(self, tmp_path):
        path = self.write(tmp_path, "experiment=helix\ntau=0.1\ntau=0.2\n")
        with pytest.raises(UsageError, match="duplicate key: tau"):
            load_config(path)

    def test_unknown_key(self, tmp_path):
        path = self.write(tmp_path, "experiment=helix\ncolor=red\n")
        with pytest.raises(UsageError, match="2: unknown key: color"):
            load_config(path)

    def test_not_key_value(self, tmp_path):
        path = self.write(tmp_path, "experiment helix\n")
        with pytest.raises(UsageError, match="1"):
            load_config(path)

    def test_periodic_conflict(self, tmp_path):
        path = self.write(
            tmp_path, "experiment=circle\nbc.periodic=true\nbc.value_a=1,0\n")
        cfg = CliConfig(subcommand="run", config_path=path,
                        mesh_sizes=[4], taus=[0.1], T=0.2)
        with pytest.raises(UsageError, match="periodic"):
            main(cfg)


class TestMain:
    def test_run_small_circle(self, tmp_path):
        cfg = parse_args(["run", "circle", "-M", "4,8", "--tau", "0.1",
                          "--T", "0.3", "--output-dir", str(tmp_path)])
        assert main(cfg) == 0
        assert (tmp_path / "circle_p2_l2.csv").exists()
        assert (tmp_path / "circle_p2_l2.meta").exists()

    def test_run_via_config_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text(
            "experiment=circle\nM=4,8\ntau=0.1\nT=0.3\nconstraint=p1\n")
        cfg = parse_args(["run", "--config", str(cfg_file),
                          "--output-dir", str(tmp_path)])
        assert main(cfg) == 0
        assert (tmp_path / "circle_p1_l2.csv").exists()

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ELASTICA_FEM_OUTPUT_DIR", str(tmp_path / "envout"))
        cfg = parse_args(["run", "circle", "-M", "4", "--tau", "0.1",
                          "--T", "0.2"])
        assert main(cfg) == 0
        assert (tmp_path / "envout" / "circle_p2_l2.csv").exists()

    def test_oval_requires_long(self):
        with pytest.raises(UsageError, match="--long"):
            main(parse_args(["run", "oval"]))

    def test_unwritable_output_dir(self, tmp_path):
        target = tmp_path / "blocked"
        target.write_text("")  # a file, so makedirs must fail
        cfg = parse_args(["run", "circle", "-M", "4", "--tau", "0.1",
                          "--T", "0.2", "--output-dir", str(target)])
        assert main(cfg) == 1

    def test_failed_cells_exit_code(self, tmp_path):
        # H2 flow diverges... no: periodic system is singular; via config
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text(
            "experiment=circle\nM=4\ntau=0.1\nT=0.2\nflow=h2\nbc.periodic=true\n")
        cfg = parse_args(["run", "--config", str(cfg_file),
                          "--output-dir", str(tmp_path)])
        assert main(cfg) == 1
        content = (tmp_path / "circle_p2_h2.csv").read_text()
        assert "FAILED" in content

    def test_stationarity_subcommand(self, capsys):
        cfg = parse_args(["stationarity", "circle", "--constraint", "p2",
                          "--initializer", "j3", "--mesh-size", "8"])
        assert main(cfg) == 0
        out = capsys.readouterr().out
        assert "velocity norm" in out
        vel = float(out.strip().split()[-1])
        assert vel <= 1e-9

    def test_diagnostics_subcommand(self, tmp_path, capsys):
        cfg = parse_args(["diagnostics", "circle", "-M", "4,8",
                          "--output-dir", str(tmp_path)])
        assert main(cfg) == 0
        path = tmp_path / "diagnostics_circle_p2.csv"
        rows = [line.split(",") for line in
                path.read_text().strip().splitlines()]
        assert len(rows) == 2
        assert all(len(r) == 6 for r in rows)
        assert float(rows[0][3]) > 0.0 and float(rows[0][4]) > 0.0

    def test_interp_study(self, capsys):
        cfg = parse_args(["interp-study", "-M", "8,16,32"])
        assert main(cfg) == 0
        out = capsys.readouterr().out
        assert "eoc" in out


class TestConsoleEntry:
    def test_usage_error_exit_code(self, capsys):
        assert console_main(["run", "circle", "--constraint", "p3"]) == 2
        assert "usage error" in capsys.readouterr().err

    def test_ok(self, tmp_path):
        assert console_main(["run", "circle", "-M", "4", "--tau", "0.1",
                             "--T", "0.2", "--output-dir", str(tmp_path)]) == 0
