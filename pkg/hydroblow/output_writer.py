#!/usr/bin/env python3
"""
Output Writer
Snapshot, norms and modulation CSVs plus fits, verdicts and manifest JSON for one run
"""

import csv
import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .core.errors import ContractError
from .pipeline.phase3_diagnostics.verdicts import count
from .pipeline.run_complete_pipeline import ScenarioBundle

SNAPSHOTS_FILE = "snapshots.csv"
NORMS_FILE = "norms.csv"
MODULATION_FILE = "modulation.csv"
FITS_FILE = "fits.json"
VERDICTS_FILE = "verdicts.json"
MANIFEST_FILE = "manifest.json"

NORMS_HEADER = ["t", "sup", "dZa0", "mean", "dt"]
MODULATION_HEADER = ["t", "s", "lambda", "nu", "E1", "E2", "res1", "res2"]


@dataclass
class RunManifest:
    command: str
    config: Dict[str, Any]
    outputs: Dict[str, str] = field(default_factory=dict)
    snapshots: int = 0
    wall_time: float = 0.0
    version: str = __version__
    verdicts: Dict[str, int] = field(default_factory=dict)
    created: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


def fmt(value: float) -> str:
    """17 significant digits"""
    return f"{float(value):.17g}"


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null"""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(dataclasses.asdict(value))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(path: Path, payload: Any):
    path.write_text(json.dumps(to_jsonable(payload), indent=2) + "\n", encoding="utf-8")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[float]]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def snapshot_rows(bundle: ScenarioBundle):
    for snapshot in bundle.trajectory.snapshots:
        for z, a in zip(snapshot.grid.nodes, snapshot.values):
            yield snapshot.time, z, a


def norm_rows(bundle: ScenarioBundle):
    for r in bundle.trajectory.records:
        yield r.t, r.sup, r.dZa0, r.mean, r.dt


def modulation_rows(bundle: ScenarioBundle):
    for row in bundle.diagnostics.rows:
        yield row.t, row.s, row.lam, row.nu, row.E1, row.E2, row.res1, row.res2


def emit_outputs(bundle: ScenarioBundle, out_dir, command: str = "scenario") -> RunManifest:
    """Write the six run files into out_dir and return the manifest"""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_csv(out_dir / SNAPSHOTS_FILE, ["t", "Z", "a"], snapshot_rows(bundle))
        write_csv(out_dir / NORMS_FILE, NORMS_HEADER, norm_rows(bundle))
        write_csv(out_dir / MODULATION_FILE, MODULATION_HEADER, modulation_rows(bundle))
        write_json(out_dir / FITS_FILE, bundle.diagnostics.fits())
        write_json(out_dir / VERDICTS_FILE, [v.to_dict() for v in bundle.verdicts])

        manifest = RunManifest(
            command=command,
            config=to_jsonable(bundle.spec),
            outputs={name: str(out_dir / name) for name in
                     (SNAPSHOTS_FILE, NORMS_FILE, MODULATION_FILE, FITS_FILE, VERDICTS_FILE, MANIFEST_FILE)},
            snapshots=len(bundle.trajectory.snapshots),
            wall_time=bundle.wall_time,
            verdicts=count(bundle.verdicts),
            created=time.strftime("%Y-%m-%dT%H:%M:%S"),
        )
        write_json(out_dir / MANIFEST_FILE, manifest.to_dict())
    except OSError as e:
        print(f"❌ Could not write outputs to {out_dir}: {e}")
        raise
    print(f"💾 Outputs written to {out_dir}")
    return manifest


def read_norms(path) -> Dict[str, np.ndarray]:
    """Columns of a norms CSV written by emit_outputs"""
    return _read_columns(Path(path), NORMS_HEADER)


def read_modulation(path) -> Dict[str, np.ndarray]:
    return _read_columns(Path(path), MODULATION_HEADER)


def _read_columns(path: Path, expected: List[str]) -> Dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != expected:
            raise ContractError(f"{path}: expected header {','.join(expected)}, got {header}")
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, len(expected))
    return {name: data[:, i] for i, name in enumerate(expected)}
