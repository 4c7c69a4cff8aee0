"""Deterministic CSV and manifest writers."""

import json
import os
import platform
import sys

import numpy as np


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_report(path, items):
    """key = value text, one entry per line, in insertion order."""
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k} = {fmt(v)}\n")
    return path


def versions():
    import scipy
    import yaml
    return {"python": sys.version.split()[0], "numpy": np.__version__, "scipy": scipy.__version__,
            "pyyaml": yaml.__version__, "platform": platform.platform()}


def write_manifest(out_dir, command, config_echo, wall_time, files):
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump({"command": command, "config": config_echo, "versions": versions(),
                   "wall_time_s": wall_time, "files": sorted(files)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def solution_rows(grid, v, chi_v, phi_v):
    return zip(grid.x, v, chi_v, phi_v)


def trajectory_rows(traj):
    t = traj.tgrid.times
    x = traj.grid.x
    for k, tk in enumerate(t):
        for xi, val in zip(x, traj.states[k]):
            yield tk, xi, val


def ledger_rows(traj):
    for r in traj.ledger:
        yield r.n, r.half_l2_sq, r.diss_xi, r.diss_zeta


def residual_rows(report):
    hist = report.residual_history
    for k, r in enumerate(hist):
        ratio = hist[k] / hist[k - 1] if k > 0 and hist[k - 1] > 0 else float("nan")
        yield k, r, ratio


def matrix_rows(K, threshold=0.0):
    A = K.matrix
    idx = np.argwhere(np.abs(A) > threshold)
    for i, j in idx:
        yield int(i), int(j), A[i, j]
