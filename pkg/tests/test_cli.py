"""Command-line front end: artifacts, manifests, exit codes, determinism."""

import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from cgwave.cli import run_command


def run(args, tmp_path, sub=None):
    out = tmp_path / (sub or "out")
    out.mkdir(exist_ok=True)
    code = run_command(args + ["--out", str(out)])
    return code, out


class TestEdge:
    def test_kp_edge_line_and_exit(self, tmp_path, capsys):
        code, out = run(["edge", "--sigma", "1", "--eps", "0.2", "--kp"], tmp_path)
        assert code == 0
        printed = capsys.readouterr().out
        assert "sigma_star" in printed
        val = float(printed.split("=")[1].split("(")[0])
        assert val == pytest.approx(1.0 / 26.0, abs=1e-12)
        assert (out / "edge.csv").exists()
        assert (out / "resolved_config.json").exists()
        assert (out / "manifest.json").exists()

    def test_manifest_hashes(self, tmp_path):
        code, out = run(["edge", "--sigma", "1", "--eps", "0.1", "--kp"], tmp_path)
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["files"]) >= 2
        for entry in manifest["files"]:
            assert entry["bytes"] > 0
            assert len(entry["sha256"]) == 64

    def test_determinism(self, tmp_path):
        _, out1 = run(["edge", "--sigma", "1.3", "--eps", "0.1", "--kp"], tmp_path, "a")
        _, out2 = run(["edge", "--sigma", "1.3", "--eps", "0.1", "--kp"], tmp_path, "b")
        assert (out1 / "edge.csv").read_bytes() == (out2 / "edge.csv").read_bytes()


class TestSpectrum:
    @pytest.mark.slow
    def test_a0_spectrum_outputs(self, tmp_path):
        code, out = run(["spectrum", "--operator", "A0", "--sigma", "1",
                         "--nx", "128", "--ny", "128", "--num", "4"], tmp_path)
        assert code == 0
        rows = (out / "spectrum.csv").read_text().strip().splitlines()
        assert rows[0] == "index,eigenvalue,residual"
        vals = [float(r.split(",")[1]) for r in rows[1:]]
        assert sum(1 for v in vals if v < -0.5) == 1
        assert sum(1 for v in vals if abs(v) < 5e-3) == 2
        meta = json.loads((out / "spectrum.meta.json").read_text())
        assert meta["continuum_edge"] == 1.0
        assert (out / "manifest.json").exists()

    @pytest.mark.slow
    def test_seeded_determinism(self, tmp_path):
        args = ["spectrum", "--operator", "B_eps", "--eps", "0.1", "--sigma", "1",
                "--nx", "64", "--ny", "64", "--num", "1", "--seed", "7"]
        _, out1 = run(args, tmp_path, "a")
        _, out2 = run(args, tmp_path, "b")
        assert (out1 / "spectrum.csv").read_bytes() == (out2 / "spectrum.csv").read_bytes()


class TestDprime:
    def test_positive_and_artifacts(self, tmp_path, capsys):
        code, out = run(["dprime", "--sigma", "0.5", "--eps", "0.05"], tmp_path)
        assert code == 0
        assert "positive: True" in capsys.readouterr().out
        row = (out / "dprime.csv").read_text().strip().splitlines()[1]
        assert float(row.split(",")[3]) > 0


class TestDnoVerify:
    def test_orders_decrease(self, tmp_path, capsys):
        code, out = run(["dno-verify", "--nx", "32", "--ny", "32", "--order", "3",
                         "--nz", "12", "--amp", "0.01"], tmp_path)
        assert code == 0
        rows = (out / "dno_verify.csv").read_text().strip().splitlines()[1:]
        errs = [float(r.split(",")[1]) for r in rows]
        assert errs[-1] < errs[0]


class TestEvolveCommand:
    def test_missing_config_exit_2(self, tmp_path):
        code = run_command(["evolve", "--config", str(tmp_path / "missing.json"),
                            "--out", str(tmp_path)])
        assert code == 2

    def test_unknown_flag_exit_2(self):
        assert run_command(["edge", "--nonsense", "1"]) == 2

    def test_short_run_outputs(self, tmp_path):
        code, out = run(["evolve", "--eps", "0.1", "--T", "0.1", "--dt", "0.01",
                         "--nx", "64", "--ny", "64", "--nz", "6",
                         "--Lx", "113.137085", "--Ly", "1131.37085",
                         "--stride", "5", "--boundary-tol", "0.1"], tmp_path)
        assert code == 0
        rows = (out / "evolve.csv").read_text().strip().splitlines()
        assert rows[0] == "t,H,P,H_drift_rel,P_drift_rel,orb_dist,a_star,b_star"
        assert len(rows) >= 3

    def test_config_round_trip(self, tmp_path):
        code, out = run(["evolve", "--eps", "0.1", "--T", "0.05", "--dt", "0.01",
                         "--nx", "64", "--ny", "64", "--nz", "6",
                         "--Lx", "113.137085", "--Ly", "1131.37085",
                         "--stride", "5", "--boundary-tol", "0.1"], tmp_path, "a")
        assert code == 0
        cfg = out / "resolved_config.json"
        out2 = tmp_path / "b"
        out2.mkdir()
        code2 = run_command(["evolve", "--config", str(cfg), "--out", str(out2)])
        assert code2 == 0
        assert (out / "evolve.csv").read_bytes() == (out2 / "evolve.csv").read_bytes()


class TestFieldIO:
    def test_wsf1_snapshot_written(self, tmp_path):
        code, out = run(["evolve", "--eps", "0.1", "--T", "0.05", "--dt", "0.01",
                         "--nx", "64", "--ny", "64", "--nz", "6",
                         "--Lx", "113.137085", "--Ly", "1131.37085",
                         "--stride", "5", "--snapshot-stride", "5",
                         "--boundary-tol", "0.1"], tmp_path)
        assert code == 0
        snaps = list((out / "snapshots").glob("*.wsf1"))
        assert snaps
        from cgwave.spectral import read_wsf1
        fld = read_wsf1(snaps[0])
        assert fld.grid.nx == 64
