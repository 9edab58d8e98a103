"""Curve CSV files, JSON configs and run manifests."""

from __future__ import annotations

import csv
import io as _io
import json
import platform
import sys
from pathlib import Path

from .experiment import ConfigError, EiCurve, ExperimentConfig, ScaleRecord

CSV_HEADER = ("system", "block_size", "ei_mean_bits", "ei_sem_bits", "replicates", "seed")


def curve_to_csv(curve: EiCurve) -> str:
    if not curve.records:
        raise ValueError("cannot emit an empty curve")
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in curve.records:
        # repr keeps full float precision so parsing round-trips exactly
        w.writerow((curve.system, r.b, repr(r.ei_mean_bits), repr(r.ei_sem_bits),
                    r.replicates, curve.seed))
    return buf.getvalue()


def emit_csv(curve: EiCurve, path) -> Path:
    path = Path(path)
    text = curve_to_csv(curve)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"could not write curve CSV to {path}: {exc}") from exc
    return path


def parse_csv(text: str) -> EiCurve:
    rows = list(csv.DictReader(_io.StringIO(text)))
    if not rows:
        raise ValueError("curve CSV has no data rows")
    if tuple(rows[0].keys()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {tuple(rows[0].keys())}")
    systems = {r["system"] for r in rows}
    seeds = {r["seed"] for r in rows}
    if len(systems) != 1 or len(seeds) != 1:
        raise ValueError("curve CSV mixes systems or seeds")
    records = tuple(
        ScaleRecord(int(r["block_size"]), float(r["ei_mean_bits"]), float(r["ei_sem_bits"]),
                    int(r["replicates"]))
        for r in rows)
    return EiCurve(systems.pop(), int(seeds.pop()), records)


def read_csv(path) -> EiCurve:
    path = Path(path)
    try:
        return parse_csv(path.read_text())
    except OSError as exc:
        raise OSError(f"could not read curve CSV {path}: {exc}") from exc


def load_json(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"could not read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return data


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(load_json(path))


def versions() -> dict:
    import matplotlib
    import numba
    import numpy
    import scipy

    from . import __version__
    return {
        "eiscale": __version__,
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "matplotlib": matplotlib.__version__,
    }


def write_manifest(path, configs, curves, wall_time_s: float, **extra) -> Path:
    manifest = {
        "configs": [c.to_dict() for c in configs],
        "seeds": [c.master_seed for c in configs],
        "fingerprints": [c.fingerprint() for c in configs],
        "flags": [{str(b): msg for b, msg in cv.flags.items()} for cv in curves],
        "errors": [cv.error for cv in curves],
        "versions": versions(),
        "wall_time_s": wall_time_s,
        **extra,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
