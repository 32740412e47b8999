"""CSV/JSON/WSF1 output writing with a hashed manifest.

Every run directory receives the artifacts plus a manifest listing each
file with byte size and SHA-256 content hash, and a resolved-config JSON
that reproduces the run byte-for-byte in single-thread mode.
"""

from __future__ import annotations

import csv
import hashlib
import json
import subprocess
from pathlib import Path

from .errors import ConfigurationError
from .eigensolve import SpectrumReport
from .evolve import EvolutionLog
from .spectral import RealField, write_wsf1

SPECTRUM_COLUMNS = ("index", "eigenvalue", "residual")
EVOLVE_COLUMNS = ("t", "H", "P", "H_drift_rel", "P_drift_rel",
                  "orb_dist", "a_star", "b_star")


def _git_hash() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "HEAD"], capture_output=True,
                             text=True, timeout=5)
        return out.stdout.strip() if out.returncode == 0 else "unknown"
    except Exception:
        return "unknown"


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_spectrum(report: SpectrumReport, out_dir: Path, stem: str = "spectrum") -> list:
    """spectrum.csv plus a JSON sidecar with grid and solver metadata."""
    out_dir = Path(out_dir)
    csv_path = out_dir / f"{stem}.csv"
    rows = [(i, ev, res) for i, (ev, res) in
            enumerate(zip(report.eigenvalues, report.residuals))]
    write_csv(csv_path, SPECTRUM_COLUMNS, rows)
    meta = {
        "continuum_edge": report.continuum_edge,
        "grid": report.grid_meta,
        "solver": {k: v for k, v in report.diagnostics.items() if k != "history"},
        "discrete_candidates": list(report.discrete_candidates),
        "units": {"eigenvalue": "g-normalized operator units"},
        "git": _git_hash(),
    }
    meta_path = out_dir / f"{stem}.meta.json"
    write_json(meta_path, meta)
    return [csv_path, meta_path]


def write_evolution(log: EvolutionLog, out_dir: Path, stem: str = "evolve",
                    snapshot_dir: str = "snapshots") -> list:
    """evolve.csv plus WSF1 snapshots (eta and xi per stored time)."""
    out_dir = Path(out_dir)
    csv_path = out_dir / f"{stem}.csv"
    write_csv(csv_path, EVOLVE_COLUMNS, list(log.rows()))
    paths = [csv_path]
    if log.snapshots:
        snap = out_dir / snapshot_dir
        snap.mkdir(exist_ok=True)
        for t, state in log.snapshots:
            for name, fld in (("eta", state.eta), ("xi", state.xi)):
                p = snap / f"{name}_t{t:011.4f}.wsf1"
                write_wsf1(fld, p)
                paths.append(p)
    meta = {k: v for k, v in log.diagnostics.items() if k != "final_state"}
    meta["git"] = _git_hash()
    meta["units"] = {"t": "time", "H": "energy", "P": "momentum"}
    meta_path = out_dir / f"{stem}.meta.json"
    write_json(meta_path, meta)
    paths.append(meta_path)
    return paths


def write_field(fld: RealField, path: Path) -> list:
    write_wsf1(fld, path)
    return [Path(path)]


def write_manifest(paths: list, out_dir: Path) -> Path:
    """List every artifact with size and content hash; fails loudly on
    unreadable paths."""
    out_dir = Path(out_dir)
    entries = []
    for p in sorted(Path(p) for p in paths):
        try:
            blob = p.read_bytes()
        except OSError as exc:
            raise ConfigurationError(f"cannot hash output {p}: {exc}")
        entries.append({"path": str(p.relative_to(out_dir)) if p.is_relative_to(out_dir) else str(p),
                        "bytes": len(blob),
                        "sha256": hashlib.sha256(blob).hexdigest()})
    manifest = out_dir / "manifest.json"
    write_json(manifest, {"files": entries})
    return manifest
