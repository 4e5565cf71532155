"""Readers for the documented curveflow CSV/JSON artifact formats.

Every reader validates headers explicitly and raises :class:`SchemaError`
naming the offending column, so format drift surfaces as a clear error
instead of a misrendered figure.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np


class SchemaError(ValueError):
    pass


SNAPSHOT_COLUMNS = ("s", "kappa", "g", "gamma_x", "gamma_y", "theta", "rho", "rho_m")
TRAJECTORY_COLUMNS = ("t", "energy", "length", "agent_mass", "closure_norm",
                      "d_m", "v_resid_h2", "rho_m_min", "rho_m_max")
DECAY_COLUMNS = ("t", "d_m", "v_resid_h2")
SAWTOOTH_COLUMNS = ("s", "z")
RECOVERY_COLUMNS = ("s", "rho_bar", "rho")


def read_table(path, required):
    """Read a CSV with a header; require the named columns."""
    if not os.path.exists(path):
        raise SchemaError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"empty CSV: {path}") from None
        rows = [row for row in reader]
    for col in required:
        if col not in header:
            raise SchemaError(f"missing column {col!r} in {path} (found {header})")
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def read_snapshot(path):
    return read_table(path, SNAPSHOT_COLUMNS)


def read_trajectory(path):
    return read_table(path, TRAJECTORY_COLUMNS)


def read_json(path):
    if not os.path.exists(path):
        raise SchemaError(f"input file not found: {path}")
    with open(path) as fh:
        return json.load(fh)


def nodal_block(run_dir):
    """Locate the nodal model: summary first, then the run manifest."""
    summary = os.path.join(run_dir, "summary.json")
    if os.path.exists(summary):
        payload = read_json(summary)
        if "nodal" in payload:
            return payload["nodal"]
    manifest = os.path.join(run_dir, "manifest.json")
    if os.path.exists(manifest):
        payload = read_json(manifest)
        nodal = payload.get("config", {}).get("nodal")
        if nodal:
            return nodal
    raise SchemaError(f"no nodal block found in {run_dir} (summary.json / manifest.json)")


def find_snapshot(run_dir, name=None):
    """Pick a snapshot CSV: explicit name, else the last final_*, else initial."""
    if name:
        return os.path.join(run_dir, name)
    finals = sorted(f for f in os.listdir(run_dir)
                    if f.startswith("final") and f.endswith(".csv"))
    if finals:
        return os.path.join(run_dir, finals[-1])
    initial = os.path.join(run_dir, "initial.csv")
    if os.path.exists(initial):
        return initial
    raise SchemaError(f"no snapshot CSV found in {run_dir}")


def polyval(coeffs, x):
    out = np.zeros_like(np.asarray(x, dtype=float))
    for c in reversed(coeffs):
        out = out * x + c
    return out
