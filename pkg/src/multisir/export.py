"""Trajectory and report serialization.

Trajectories go to ``trajectory.csv`` (or ``trajectory.json`` holding the same
table as ``columns`` + ``rows``); numbers carry 12 significant digits and
undefined LERNs are empty fields (``null`` in JSON).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .integrator import Trajectory

SCALAR_ORDER = ("R", "lambda_max", "lern", "wavg")


@dataclass(frozen=True)
class RunArtifacts:
    trajectory: Path
    reproduction: Path | None
    theorems: Path | None
    peak: Path | None
    manifest: Path
    scenario: Path | None = None


def fmt(value) -> str:
    value = float(value)
    if math.isnan(value):
        return ""
    return f"{value:.12g}"


def rounded(obj):
    """Recursively round floats to 12 significant digits; NaN becomes None."""
    if isinstance(obj, dict):
        return {str(k): rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return rounded(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if math.isnan(obj) else float(f"{float(obj):.12g}")
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(rounded(obj), indent=1, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def table(traj: Trajectory, record=None):
    """Header and rows of the trajectory table."""
    n, m = traj.n, traj.m
    record = traj.meta.get("record", []) if record is None else record
    header = ["t"] + [f"{c}_{i + 1}" for c in "sxr" for i in range(n)] + [f"w_{j + 1}" for j in range(m)]
    cols = [traj.times[:, None], traj.s, traj.x, traj.r, traj.w]
    for name in SCALAR_ORDER:
        if name not in record:
            continue
        values = np.asarray(traj.scalars[name], dtype=float)
        if name == "lern":
            header += [f"lern_{i + 1}" for i in range(values.shape[1])]
            cols.append(values)
        else:
            header.append(name)
            cols.append(values[:, None])
    return header, np.hstack(cols)


def write_trajectory(traj: Trajectory, path, fmt_name="csv", record=None) -> Path:
    header, data = table(traj, record)
    path = Path(path)
    try:
        if fmt_name == "csv":
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(header)
                for row in data:
                    writer.writerow([fmt(v) for v in row])
        elif fmt_name == "json":
            write_json({"columns": header, "rows": data}, path)
        else:
            raise ValueError(f"unknown format {fmt_name!r}")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def read_trajectory(path) -> Trajectory:
    """Inverse of :func:`write_trajectory` (format chosen by file suffix)."""
    path = Path(path)
    if path.suffix == ".json":
        blob = json.loads(path.read_text())
        header = blob["columns"]
        data = np.array([[np.nan if v is None else v for v in row] for row in blob["rows"]], dtype=float)
    else:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        data = np.array([[float(v) if v != "" else np.nan for v in row] for row in rows[1:]], dtype=float)
    data = data.reshape(-1, len(header))
    col = {name: i for i, name in enumerate(header)}

    def block(prefix):
        idx = [i for i, h in enumerate(header) if h.startswith(prefix + "_") and h[len(prefix) + 1:].isdigit()]
        return data[:, idx]

    traj = Trajectory(times=data[:, col["t"]], s=block("s"), x=block("x"), r=block("r"), w=block("w"))
    record = []
    for name in SCALAR_ORDER:
        if name == "lern":
            lern = block("lern")
            if lern.shape[1]:
                traj.scalars["lern"] = lern
                record.append(name)
        elif name in col:
            traj.scalars[name] = data[:, col[name]]
            record.append(name)
    traj.meta["record"] = record
    return traj


def export_trajectory(result, out_dir, fmt_name="csv", tool_version=__version__) -> RunArtifacts:
    """Write the trajectory, reproduction series, claim reports, peak report,
    resolved scenario and a manifest into ``out_dir``."""
    from .scenario import save_scenario

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sc = result.scenario
    traj_path = write_trajectory(result.trajectory, out / f"trajectory.{fmt_name}", fmt_name, list(sc.record))
    scen_path = out / "scenario.json"
    save_scenario(sc, scen_path)
    repro = write_json([r.to_dict() for r in result.series], out / "reproduction.json")
    theorems = write_json([r.to_dict() for r in result.theorems], out / "theorems.json")
    peak = write_json(result.peak.to_dict() if result.peak else None, out / "peak.json")
    files = [p.name for p in (traj_path, scen_path, repro, theorems, peak)]
    manifest = write_json({
        "seed": sc.seed,
        "scenario_sha256": sc.digest(),
        "tool": "multisir",
        "tool_version": tool_version,
        "format": fmt_name,
        "wavg_anchor": result.trajectory.meta.get("wavg_anchor"),
        "files": files,
    }, out / "manifest.json")
    return RunArtifacts(traj_path, repro, theorems, peak, manifest, scen_path)
