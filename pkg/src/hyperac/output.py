"""CSV writers/readers, config hashing and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .kinetics import Grid1D, KineticState, SchemeParams, reconstruct
from .potential import PotentialSpec

SNAPSHOT_HEADER = ["x", "alpha", "beta", "u", "v", "u_t"]
DIAGNOSTICS_HEADER = ["t", "E_scaled", "kinetic", "gradient", "potential", "n_transitions"]


def fmt(value) -> str:
    """17 significant digits; enough for every double to round-trip."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=True)


def config_hash(obj: Any) -> str:
    """Hash of the canonicalized config; insensitive to key order and whitespace."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()[:16]


def write_rows(path: Path, header: list[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_snapshot(path: Path, state: KineticState, params: SchemeParams, pot: PotentialSpec) -> None:
    u, v, u_t = reconstruct(state, params, pot)
    cols = (state.grid.nodes, state.alpha, state.beta, u, v, u_t)
    write_rows(Path(path), SNAPSHOT_HEADER, zip(*cols))


def read_snapshot(path: Path, grid: Grid1D, t: float = 0.0) -> KineticState:
    """Rebuild a kinetic state from a snapshot CSV written by ``write_snapshot``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return KineticState(data[:, 1], data[:, 2], t, grid)


def write_diagnostics(path: Path, rows) -> None:
    """One line per sampled time; interface columns padded with ``nan``."""
    width = max((len(r.interfaces) for r in rows), default=0)
    header = list(DIAGNOSTICS_HEADER)
    for i in range(1, width + 1):
        header += [f"interface_lo_{i}", f"interface_hi_{i}"]
    lines = []
    for r in rows:
        e = r.energy
        line = [r.t, e.total_scaled, e.kinetic, e.gradient, e.potential, r.n_transitions]
        for lo, hi in r.interfaces:
            line += [lo, hi]
        line += [math.nan] * (len(header) - len(line))
        lines.append(line)
    write_rows(Path(path), header, lines)


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@dataclass
class RunManifest:
    config_hash: str
    tool_version: str
    start_time: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    end_time: str | None = None
    outputs: list[str] = field(default_factory=list)
    exit_status: int | None = None

    def finish(self, run_dir: Path, exit_status: int) -> Path:
        self.end_time = datetime.now(timezone.utc).isoformat()
        self.exit_status = exit_status
        path = Path(run_dir) / "manifest.json"
        path.write_text(json.dumps(self.__dict__, indent=2) + "\n", encoding="utf-8")
        return path


def output_root(cli_value: str | None) -> Path:
    return Path(cli_value or os.environ.get("HYPERAC_OUT") or "runs")
