#!/usr/bin/env python3
"""Produce the golden CSV/WSF1 fixtures consumed by the plotting frontend.

Runs the solver CLI for the spectrum and a short evolution, and writes the
lump elevation profile and its x-derivative as WSF1 field files.  Outputs
land in frontend/fixtures/.
"""

import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from cgwave.cli import run_command
from cgwave.spectral import dx, make_grid, write_wsf1
from cgwave.waves import Q0_field_periodized

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "frontend" / "fixtures"


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        code = run_command(["spectrum", "--operator", "A0", "--sigma", "1",
                            "--nx", "128", "--ny", "128", "--num", "6",
                            "--out", tmp])
        if code != 0:
            return code
        shutil.copy(Path(tmp) / "spectrum.csv", FIXTURES / "spectrum.csv")
        shutil.copy(Path(tmp) / "spectrum.meta.json", FIXTURES / "spectrum.meta.json")

    with tempfile.TemporaryDirectory() as tmp:
        code = run_command(["evolve", "--eps", "0.1", "--T", "3", "--dt", "0.01",
                            "--nx", "64", "--ny", "64", "--nz", "6",
                            "--Lx", "113.137085", "--Ly", "1131.37085",
                            "--stride", "20", "--perturb", "0.01",
                            "--boundary-tol", "0.1", "--out", tmp])
        if code != 0:
            return code
        shutil.copy(Path(tmp) / "evolve.csv", FIXTURES / "evolve.csv")

    grid = make_grid(64, 64, 20.0 * np.sqrt(2.0), 20.0 * np.sqrt(2.0))
    q0 = Q0_field_periodized(1.0, grid)
    write_wsf1(q0, FIXTURES / "q0_profile.wsf1")
    write_wsf1(dx(q0), FIXTURES / "dxq0_mode.wsf1")
    print(f"fixtures written to {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
