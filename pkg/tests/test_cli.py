import json

import pytest

from uncert.cli import REPORT_COLUMNS, REPORT_VERSION, main


def verify_config(**overrides):
    cfg = {
        "grid": {"n": 512, "x_min": -12.8, "x_max": 12.8},
        "confidence": [[0.05, 0.05]],
        "generators": [{"kind": "gaussian", "sigma": 1.0}],
        "calibration": {"delta_ladder": [0.4, 0.2]},
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


class TestVerify:
    def test_passing_run_writes_reports(self, tmp_path, capsys):
        path = write_config(tmp_path, verify_config())
        rc = main(["--out", str(tmp_path / "out"), "verify", path])
        assert rc == 0
        assert "all passed" in capsys.readouterr().out
        csv_text = (tmp_path / "out" / "report.csv").read_text()
        lines = csv_text.splitlines()
        assert lines[0] == REPORT_VERSION
        assert lines[1].split(",") == REPORT_COLUMNS
        assert len(lines) == 3
        row = lines[2].split(",")
        assert row[0] == "gen0-eps0"
        assert row[-1] == "true"
        # floats are serialized at fixed precision
        assert row[1] == "5.00000e-02"
        payload = json.loads((tmp_path / "out" / "report.json").read_text())
        assert len(payload) == 1 and payload[0]["passed"] is True

    def test_reports_are_byte_stable(self, tmp_path):
        path = write_config(tmp_path, verify_config())
        main(["--out", str(tmp_path / "a"), "verify", path])
        main(["--out", str(tmp_path / "b"), "verify", path])
        assert (tmp_path / "a" / "report.csv").read_bytes() == \
            (tmp_path / "b" / "report.csv").read_bytes()
        assert (tmp_path / "a" / "report.json").read_bytes() == \
            (tmp_path / "b" / "report.json").read_bytes()

    def test_exhausted_confidence_annotated(self, tmp_path):
        cfg = verify_config(confidence=[[0.6, 0.6]])
        rc = main(["--out", str(tmp_path / "out"), "verify",
                   write_config(tmp_path, cfg)])
        assert rc == 0
        csv_text = (tmp_path / "out" / "report.csv").read_text()
        assert "gen0-eps0(no positive bound)" in csv_text

    def test_warped_scenarios_included(self, tmp_path):
        cfg = verify_config(warps=[{
            "name": "wiggle",
            "q_knots": [[-12.8, -12.8], [-1.0, -0.7], [1.0, 1.3], [12.8, 12.8]],
        }])
        rc = main(["--out", str(tmp_path / "out"), "verify",
                   write_config(tmp_path, cfg)])
        assert rc == 0
        csv_text = (tmp_path / "out" / "report.csv").read_text()
        assert "gen0-wiggle-eps0" in csv_text
        assert len(csv_text.splitlines()) == 4

    def test_mixture_generator(self, tmp_path):
        cfg = verify_config(generators=[{
            "kind": "mixture",
            "components": [{"weight": 0.5, "sigma": 0.8},
                           {"weight": 0.5, "sigma": 1.2}],
        }])
        rc = main(["--out", str(tmp_path / "out"), "verify",
                   write_config(tmp_path, cfg)])
        assert rc == 0


class TestVerifyConfigErrors:
    def test_unknown_top_level_key(self, tmp_path):
        cfg = verify_config(surprise=1)
        assert main(["verify", write_config(tmp_path, cfg)]) == 2

    def test_missing_required_key(self, tmp_path):
        cfg = verify_config()
        del cfg["calibration"]
        assert main(["verify", write_config(tmp_path, cfg)]) == 2

    def test_grid_n_not_power_of_two(self, tmp_path):
        cfg = verify_config(grid={"n": 500, "x_min": -12.8, "x_max": 12.8})
        assert main(["verify", write_config(tmp_path, cfg)]) == 2

    def test_bad_eps_pair(self, tmp_path):
        cfg = verify_config(confidence=[[0.05]])
        assert main(["verify", write_config(tmp_path, cfg)]) == 2

    def test_unknown_generator_kind(self, tmp_path):
        cfg = verify_config(generators=[{"kind": "bessel"}])
        assert main(["verify", write_config(tmp_path, cfg)]) == 2

    def test_ladder_below_grid_resolution(self, tmp_path):
        cfg = verify_config(calibration={"delta_ladder": [0.4, 0.01]})
        assert main(["verify", write_config(tmp_path, cfg)]) == 2

    def test_non_monotone_warp_knots(self, tmp_path):
        cfg = verify_config(warps=[{
            "q_knots": [[-12.8, -12.8], [0.0, 2.0], [1.0, 1.0], [12.8, 12.8]],
        }])
        assert main(["verify", write_config(tmp_path, cfg)]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["verify", str(tmp_path / "nope.json")]) == 2

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["verify", str(path)]) == 2

    def test_smearings_validated_even_if_unused(self, tmp_path):
        cfg = verify_config(smearings=[{"kind": "delta"}])  # missing "c"
        assert main(["verify", write_config(tmp_path, cfg)]) == 2


class TestWidths:
    def test_gaussian_state_passes(self, capsys):
        rc = main(["--grid-n", "1024", "widths",
                   "--state", "gaussian:sigma=1", "--eps", "0.05", "--window", "16"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "width_q" in out and "passed         true" in out

    def test_eps_pair_accepted(self, capsys):
        rc = main(["--grid-n", "1024", "widths",
                   "--state", "box:width=2,center=0", "--eps", "0.05,0.1",
                   "--window", "16"])
        assert rc == 0

    def test_unknown_state_kind(self):
        assert main(["widths", "--state", "airy:sigma=1", "--eps", "0.05"]) == 2

    def test_unknown_state_parameter(self):
        assert main(["widths", "--state", "gaussian:skew=2", "--eps", "0.05"]) == 2


class TestScan:
    def scan_config(self, **overrides):
        cfg = {
            "grid": {"n": 512, "x_min": -12.8, "x_max": 12.8},
            "eps": [0.05, 0.05],
            "family": "gaussian",
            "lattice": {"sigma": [0.8, 1.0, 1.2], "x0": [0.0, 1.0]},
        }
        cfg.update(overrides)
        return cfg

    def test_lattice_rows_written(self, tmp_path, capsys):
        path = write_config(tmp_path, self.scan_config())
        rc = main(["--out", str(tmp_path / "out"), "scan", path])
        assert rc == 0
        lines = (tmp_path / "out" / "scan.csv").read_text().splitlines()
        assert lines[0] == REPORT_VERSION
        # parameters are ordered by name: sigma, x0
        assert lines[1].split(",")[:2] == ["sigma", "x0"]
        assert len(lines) == 2 + 3 * 2

    def test_product_clears_bound_on_lattice(self, tmp_path):
        path = write_config(tmp_path, self.scan_config())
        main(["--out", str(tmp_path / "out"), "scan", path])
        lines = (tmp_path / "out" / "scan.csv").read_text().splitlines()
        cols = lines[1].split(",")
        for line in lines[2:]:
            row = dict(zip(cols, line.split(",")))
            assert float(row["ratio_uffink"]) >= 0.95

    def test_cap_enforced(self, tmp_path):
        cfg = self.scan_config(lattice={"sigma": [1.0] * 40, "x0": [0.0] * 40},
                               cap=100)
        assert main(["scan", write_config(tmp_path, cfg)]) == 2

    def test_unknown_lattice_parameter(self, tmp_path):
        cfg = self.scan_config(lattice={"chirp": [1.0]})
        assert main(["scan", write_config(tmp_path, cfg)]) == 2

    def test_empty_lattice_value_list_gives_header_only(self, tmp_path):
        cfg = self.scan_config(lattice={"sigma": []})
        path = write_config(tmp_path, cfg)
        rc = main(["--out", str(tmp_path / "out"), "scan", path])
        assert rc == 0
        lines = (tmp_path / "out" / "scan.csv").read_text().splitlines()
        assert len(lines) == 2
