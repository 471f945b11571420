import json
import math
from pathlib import Path

import numpy as np
import pytest

from wavekin.cli import run_cli
from wavekin.config import read_snapshot

DECAY_CONFIG = {
    "physics": {"nu": 0.5, "rho": 0.0, "dim": 3},
    "grid": {"k_min": 0.01, "k_max": 100.0, "n": 48, "spacing": "log"},
    "scheme": {"kind": "rk4_if", "dt": 0.02, "t_end": 0.2},
    "initial_condition": {"kind": "gaussian_bump", "center": 1.0, "width": 0.3,
                          "amplitude": 1.0},
    "collision": {"kernel_constant": 0.0},
    "output": {"snapshot_times": [0.0, 0.2],
               "moment_exponents": [1.0, 2.0]},
    "seed": 3,
}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_csv_columns(path):
    rows = []
    cols = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or not line:
            continue
        if cols is None:
            cols = line.split(",")
            continue
        rows.append(line.split(","))
    return cols, rows


class TestSimulate:
    def test_pure_decay_matches_analytic(self, tmp_path):
        cfg = write_config(tmp_path, DECAY_CONFIG)
        out = tmp_path / "out"
        assert run_cli(["simulate", "--config", cfg, "--out", str(out)]) == 0

        manifest = json.loads((out / "MANIFEST.json").read_text())
        assert manifest["complete"] is True
        assert manifest["code_version"]
        for name in manifest["files"]:
            assert (out / name).exists()

        cols, rows = read_csv_columns(out / "moments.csv")
        i_t = cols.index("time")
        i_m1 = cols.index("M[1.0]")
        t = np.array([float(r[i_t]) for r in rows])
        m1 = np.array([float(r[i_m1]) for r in rows])

        nodes, f0, _ = read_snapshot(out / "spectrum_0000.csv")
        law_e = nodes ** 1.5
        vol = None
        from wavekin.collision import RadialGrid
        grid = RadialGrid.log(0.01, 100.0, 48, dim=3)
        vol = grid.vol
        d = 2 * 0.5 * nodes ** 2
        expected = np.array([np.sum(f0 * np.exp(-d * tv) * law_e * vol) for tv in t])
        np.testing.assert_allclose(m1, expected, rtol=1e-12)

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, DECAY_CONFIG)
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert run_cli(["simulate", "--config", cfg, "--out", str(out)]) == 0
            outs.append(out)
        for name in ("moments.csv", "spectrum_0000.csv", "spectrum_final.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_invalid_config_exit_code(self, tmp_path):
        bad = dict(DECAY_CONFIG)
        bad["physics"] = {"nu": -2}
        cfg = write_config(tmp_path, bad)
        assert run_cli(["simulate", "--config", cfg,
                        "--out", str(tmp_path / "o")]) == 1

    def test_failure_writes_incomplete_manifest(self, tmp_path):
        broken = json.loads(json.dumps(DECAY_CONFIG))
        broken["initial_condition"] = {"kind": "from_file",
                                       "path": str(tmp_path / "missing.csv")}
        cfg = write_config(tmp_path, broken)
        out = tmp_path / "out"
        assert run_cli(["simulate", "--config", cfg, "--out", str(out)]) == 1
        manifest = json.loads((out / "MANIFEST.json").read_text())
        assert manifest["complete"] is False
        assert manifest["error"]


class TestKzScan:
    def test_row_count_and_argmin_flag(self, tmp_path):
        data = json.loads(json.dumps(DECAY_CONFIG))
        data["physics"] = {"nu": 0.0, "dim": 2}
        data["grid"] = {"k_min": 0.01, "k_max": 100.0, "n": 96, "spacing": "log"}
        del data["collision"]
        cfg = write_config(tmp_path, data)
        out = tmp_path / "kz"
        code = run_cli(["kz-scan", "--config", cfg, "--out", str(out),
                        "--from", "3.5", "--to", "5.0", "--steps", "31"])
        assert code == 0
        cols, rows = read_csv_columns(out / "kz_scan.csv")
        assert len(rows) == 31
        flags = [int(r[cols.index("is_argmin")]) for r in rows]
        assert sum(flags) == 1
        assert (out / "kz_scan.png").exists()


class TestGeometry:
    def test_outputs_match_library(self, tmp_path):
        cfg = write_config(tmp_path, DECAY_CONFIG)
        out = tmp_path / "geo"
        assert run_cli(["geometry", "--config", cfg, "--out", str(out)]) == 0
        cols, rows = read_csv_columns(out / "geometry_s.csv")
        alphas = np.array([float(r[0]) for r in rows])
        s = np.array([float(r[1]) for r in rows])
        from wavekin.geometry import solve_s
        from wavekin.dispersion import DispersionLaw
        np.testing.assert_allclose(
            s, solve_s(alphas, 1.0, DispersionLaw()), rtol=0, atol=1e-15)
        assert (out / "geometry_weights.csv").exists()
        assert (out / "geometry.png").exists()


class TestOracleCommand:
    def test_report_passes(self, tmp_path):
        cfg = write_config(tmp_path, DECAY_CONFIG)
        out = tmp_path / "orc"
        code = run_cli(["oracle", "--config", cfg, "--out", str(out),
                        "--samples", "2000000", "--epsilon", "0.08",
                        "--seed", "1234"])
        cols, rows = read_csv_columns(out / "oracle_report.csv")
        assert len(rows) == 18  # 6 test functions x 2 surfaces x 3 radii
        assert all(r[cols.index("pass")] == "1" for r in rows)
        assert code == 0


class TestUsage:
    def test_unknown_subcommand_exit_2(self, capsys):
        assert run_cli(["frobnicate"]) == 2

    def test_missing_config_exit_2(self):
        assert run_cli(["simulate"]) == 2

    def test_no_args_exit_2(self):
        assert run_cli([]) == 2
