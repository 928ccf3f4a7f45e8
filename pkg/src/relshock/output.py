"""CSV and JSON emitters for snapshots, fans and tables."""

from __future__ import annotations

import csv
import json
import os

import numpy as np

__all__ = ["emit_plotdata", "emit_fan_json", "emit_table", "emit_manifest"]

SNAPSHOT_COLUMNS = ("r", "rho", "v", "A", "B", "M", "sqrtAB", "mu")


def _fmt(x) -> str:
    return f"{float(x):.10e}"


def emit_plotdata(prof, path: str) -> str:
    """Write one snapshot as CSV, one row per interior cell.

    Fluid columns are sampled at the cell center; metric and mass columns
    carry the cell's left half-gridpoint values (offset -dx/2), which keeps
    mu = 1 - A exact.
    """
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SNAPSHOT_COLUMNS)
        n = prof.x.size
        for i in range(n):
            a = prof.A[i]
            b = prof.B[i]
            writer.writerow([
                _fmt(prof.x[i]), _fmt(prof.rho[i]), _fmt(prof.v[i]),
                _fmt(a), _fmt(b), _fmt(prof.M[i]),
                _fmt(np.sqrt(a * b)), _fmt(1.0 - a),
            ])
    return path


def emit_fan_json(fan, path: str) -> str:
    """Serialize a classified Riemann fan."""
    def wave(w):
        if hasattr(w, "beta"):
            return {"kind": "shock", "beta": w.beta, "speed": w.speed}
        return {"kind": "rarefaction", "head_speed": w.head_speed,
                "tail_speed": w.tail_speed}

    payload = {
        "region": fan.region,
        "left": {"rho": fan.left.rho, "v": fan.left.v},
        "middle": {"rho": fan.middle.rho, "v": fan.middle.v},
        "right": {"rho": fan.right.rho, "v": fan.right.v},
        "wave1": wave(fan.wave1),
        "wave2": wave(fan.wave2),
    }
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def emit_table(result: dict, path: str) -> str:
    """Mesh-doubling table as CSV in the error/rate column layout."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    names = list(result["errors"].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["n"]
        for name in names:
            header += [f"{name}_error", f"{name}_rate"]
        writer.writerow(header)
        for k, n in enumerate(result["ns"]):
            row = [str(n)]
            for name in names:
                err = result["errors"][name][k]
                rate = "" if k == 0 else f"{result['rates'][name][k - 1]:.4f}"
                row += [_fmt(err), rate]
            writer.writerow(row)
    return path


def emit_manifest(payload: dict, path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)

    def default(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        raise TypeError(f"cannot serialize {type(obj)}")

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=default)
        fh.write("\n")
    return path
