import csv
import json
import math

import numpy as np
import pytest

from extkernel.cli import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    ConfigError,
    RunConfig,
    main,
    parse_config,
)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


class TestParsing:
    def test_defaults(self):
        command, cfg = parse_config(["kernel"])
        assert command == "kernel"
        assert cfg.potential == (0.0, 0.0, 1.0)
        assert cfg.n == 4

    def test_flags(self):
        _, cfg = parse_config(
            ["kernel", "--n", "6", "--source=2,-1", "--grid=-1:1:5"]
        )
        assert cfg.n == 6
        assert cfg.source == (2.0, -1.0)
        assert cfg.grid == (-1.0, 1.0, 5)

    def test_toml_config(self, tmp_path):
        cfgfile = tmp_path / "run.toml"
        cfgfile.write_text(
            'potential = [0.0, 0.0, 0.0, 0.0, 1.0]\n'
            'n = 6\nsource = [1.0, -0.5]\ngrid = "-2:2:9"\nseed = 99\n'
        )
        _, cfg = parse_config(["kernel", "--config", str(cfgfile)])
        assert cfg.potential == (0.0, 0.0, 0.0, 0.0, 1.0)
        assert cfg.n == 6
        assert cfg.seed == 99

    def test_flags_override_toml(self, tmp_path):
        cfgfile = tmp_path / "run.toml"
        cfgfile.write_text("n = 6\n")
        _, cfg = parse_config(["kernel", "--config", str(cfgfile), "--n", "3"])
        assert cfg.n == 3

    def test_unknown_toml_key(self, tmp_path):
        cfgfile = tmp_path / "run.toml"
        cfgfile.write_text("banana = 1\n")
        with pytest.raises(ConfigError, match="unknown config key"):
            parse_config(["kernel", "--config", str(cfgfile)])

    def test_missing_config_file(self):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(["kernel", "--config", "/no/such/file.toml"])

    def test_bad_grid(self):
        with pytest.raises(ConfigError, match="lo:hi:count"):
            parse_config(["kernel", "--grid", "1:2"])

    def test_duplicate_sources_rejected(self):
        _, cfg = parse_config(["kernel", "--source", "1,1"])
        with pytest.raises(ConfigError, match="distinct"):
            cfg.source_spec()

    def test_sources_sorted_descending(self):
        _, cfg = parse_config(["kernel", "--source=-0.5,2,1"])
        assert cfg.source_spec().a == (2.0, 1.0, -0.5)


class TestExitCodes:
    def test_bad_potential_is_config_error(self, capsys):
        code = main(["kernel", "--potential", "0,0,0,1"])
        assert code == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_zero_source_is_config_error(self, capsys):
        assert main(["kernel", "--source", "0"]) == EXIT_CONFIG

    def test_sample_nongaussian_is_config_error(self, capsys):
        code = main(["sample", "--potential", "0,0,0,0,1", "--count", "2"])
        assert code == EXIT_CONFIG

    def test_verify_ok(self, capsys):
        code = main(["verify", "--n", "3", "--source", "1,-0.5"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out


class TestOutputs:
    def test_recurrence_csv(self, tmp_path):
        out = tmp_path / "rec.csv"
        code = main(["recurrence", "--n", "4", "--out", str(out)])
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["k", "alpha", "beta", "h", "kappa"]
        assert len(rows) == 5
        assert float(rows[0][3]) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
        # run summary lands next to the CSV
        summary = json.loads(out.with_suffix(".run.json").read_text())
        assert summary["command"] == "recurrence"
        assert summary["config"]["n"] == 4
        assert summary["elapsed_seconds"] >= 0.0

    def test_kernel_csv(self, tmp_path):
        out = tmp_path / "kern.csv"
        code = main(
            ["kernel", "--n", "2", "--source", "1", "--grid=-1:1:3",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["x", "y", "K0", "K", "K_minus_K0"]
        assert len(rows) == 9
        for row in rows:
            k0, k, diff = (float(v) for v in row[2:])
            assert diff == pytest.approx(k - k0, abs=1e-15)

    def test_kernel_respects_quad_size(self, tmp_path):
        out = tmp_path / "kern.csv"
        code = main(
            ["kernel", "--n", "2", "--source", "1", "--grid", "0:1:2",
             "--quad-size", "300", "--out", str(out)]
        )
        assert code == EXIT_OK
        summary = json.loads(out.with_suffix(".run.json").read_text())
        assert summary["quadrature_size"] <= 300

    def test_lmax_csv(self, tmp_path):
        out = tmp_path / "lmax.csv"
        code = main(
            ["lmax", "--n", "1", "--source", "1", "--s-grid", "0.5:2.5:2",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["s", "cdf", "nystrom_m", "truncation_T"]
        assert float(rows[0][1]) == pytest.approx(0.5, abs=1e-8)
        phi = 0.5 * math.erfc(-2.0 * math.sqrt(2.0) / math.sqrt(2.0))
        assert float(rows[1][1]) == pytest.approx(phi, abs=1e-8)

    def test_sample_csv(self, tmp_path):
        out = tmp_path / "spectra.csv"
        code = main(
            ["sample", "--n", "3", "--source", "1,-0.5", "--count", "4",
             "--seed", "11", "--out", str(out)]
        )
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["lambda_1", "lambda_2", "lambda_3"]
        assert len(rows) == 4
        for row in rows:
            vals = [float(v) for v in row]
            assert vals == sorted(vals, reverse=True)

    def test_sample_reproducible(self, tmp_path):
        args = ["sample", "--n", "2", "--source", "1", "--count", "3",
                "--seed", "5"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        main(args + ["--out", str(out1)])
        main(args + ["--out", str(out2)])
        assert out1.read_text() == out2.read_text()

    def test_stdout_kernel(self, capsys):
        code = main(["kernel", "--n", "2", "--source", "1", "--grid", "0:1:2"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "x,y,K0,K,K_minus_K0"
        assert len(lines) == 5

    def test_float_roundtrip_precision(self, tmp_path):
        out = tmp_path / "rec.csv"
        main(["recurrence", "--n", "8", "--out", str(out)])
        _, rows = read_csv(out)
        # 17 significant digits round-trip float64 exactly
        assert float(rows[8][2]) == pytest.approx(4.0, rel=1e-15)
