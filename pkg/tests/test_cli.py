import json

import pytest

from tgplab.cli import main
from tgplab.config import coerce, load_config, parse_text
from tgplab.errors import ConfigError
from tgplab.experiments import ExperimentConfig

SMALL = ["n_grid=256,512", "reps=2", "mc_posterior_draws=10"]


class TestLoadConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        p = tmp_path / "empty.cfg"
        p.write_text("")
        cfg = load_config(p)
        assert cfg == ExperimentConfig()
        assert (cfg.alpha, cfg.b, cfg.sigma2, cfg.m_const) == (1.0, 0.25, 1.0, 4.0)

    def test_alpha_below_floor(self):
        with pytest.raises(ConfigError, match="alpha"):
            load_config(overrides=["alpha=0.4", "b=1/4"])

    def test_b_half_in_rate_mode(self):
        with pytest.raises(ConfigError, match="b"):
            load_config(overrides={"b": "0.5"}, mode="rate")

    def test_precedence(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("# comment\nreps = 5\nseed = 3  # trailing\nn_grid = 64, 128, 256\n")
        cfg = load_config(p, ["seed=9"])
        assert (cfg.reps, cfg.seed, cfg.n_grid) == (5, 9, (64, 128, 256))

    def test_json_file(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"alpha": 2, "n_grid": [100, 200, 400], "truth_mode": "random"}))
        cfg = load_config(p)
        assert cfg.alpha == 2.0 and cfg.n_grid == (100, 200, 400) and cfg.truth_mode == "random"

    @pytest.mark.parametrize("bad", [["nonsense=1"], ["reps=two"], ["alpha"], ["n_grid=[1,"], ["alpha=true"]])
    def test_errors_name_the_key(self, bad):
        with pytest.raises(ConfigError) as info:
            load_config(overrides=bad)
        assert bad[0].split("=")[0] in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")

    def test_parsing_helpers(self):
        assert coerce("b", "1/8") == 0.125
        assert coerce("spectrum_a", "[1, 2.5]") == (1.0, 2.5)
        with pytest.raises(ConfigError):
            parse_text("[1, 2]")
        with pytest.raises(ConfigError):
            parse_text("just words")


class TestExitCodes:
    def test_verify(self, tmp_path):
        assert main(["verify", "--out-dir", str(tmp_path)]) == 0
        rows = (tmp_path / "results.csv").read_text().splitlines()
        assert rows[0].startswith("module,check,passed")
        assert len(rows) > 20

    def test_usage_errors(self, tmp_path, capsys):
        assert main(["bogus"]) == 2
        assert main(["rate", "--format", "xml", "--out-dir", str(tmp_path)]) == 2
        assert main(["rate", "--jobs", "0", "--out-dir", str(tmp_path)]) == 2
        assert main(["rate", "unknown=1", "--out-dir", str(tmp_path)]) == 2
        assert "unknown" in capsys.readouterr().err

    def test_runtime_error(self, tmp_path, capsys):
        assert main(["denominator", "den_eps=0.12", "den_reps=2", "--out-dir", str(tmp_path)]) == 1
        assert "enlarge" in capsys.readouterr().err

    def test_resolved_config_written(self, tmp_path):
        assert main(["spectrum", "--seed", "11", "spectrum_jmax=5", "--out-dir", str(tmp_path)]) == 0
        resolved = json.loads((tmp_path / "resolved-config.json").read_text())
        assert resolved["seed"] == 11 and resolved["spectrum_jmax"] == 5
        assert len((tmp_path / "results.csv").read_text().splitlines()) == 1 + 5 * 4


class TestOutputs:
    def test_rate_repeat_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["rate", "--seed", "7", "--jobs", "1", "--out-dir", str(a)]) == 0
        assert main(["rate", "--seed", "7", "--jobs", "1", "--out-dir", str(b)]) == 0
        assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
        assert (a / "resolved-config.json").read_bytes() == (b / "resolved-config.json").read_bytes()

    def test_seed_changes_output(self, tmp_path):
        main(["rate", *SMALL, "--seed", "1", "--out-dir", str(tmp_path / "a")])
        main(["rate", *SMALL, "--seed", "2", "--out-dir", str(tmp_path / "b")])
        assert (tmp_path / "a" / "results.csv").read_bytes() != (tmp_path / "b" / "results.csv").read_bytes()

    def test_json_format(self, tmp_path):
        assert main(["rate", *SMALL, "--format", "json", "--timings", "--out-dir", str(tmp_path)]) == 0
        data = json.loads((tmp_path / "results.json").read_text())
        assert set(data) == {"config", "results", "timings"}
        assert data["timings"]["total_seconds"] > 0
        assert data["results"]["n_values"] == [256, 512]
        assert "cells" not in data["results"]

    def test_figure1_svg(self, tmp_path):
        assert main(["figure1", "--out-dir", str(tmp_path)]) == 0
        text = (tmp_path / "figure1.svg").read_text()
        assert text.startswith("<svg") or text.startswith("<?xml")
        for a in ("a = 1", "a = 2", "a = 4", "a = 8"):
            assert a in text
        assert "j = 1..20" in text and "j = 21..50" in text

    def test_plot_flag(self, tmp_path):
        assert main(["rate", *SMALL, "n_grid=256,512,1024", "--plot", "--out-dir", str(tmp_path)]) == 0
        assert (tmp_path / "rate.svg").exists()
        assert main(["w2", *SMALL, "--out-dir", str(tmp_path)]) == 0
        assert not (tmp_path / "w2.svg").exists()

    def test_env_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TGPLAB_OUT_DIR", str(tmp_path / "env"))
        assert main(["spectrum", "spectrum_jmax=3"]) == 0
        assert (tmp_path / "env" / "results.csv").exists()
