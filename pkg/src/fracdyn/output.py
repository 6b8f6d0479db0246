"""Data-file writers: CSV, greyscale basin images and run manifests.

All numeric text is written with 17 significant digits so values round-trip
exactly through the files; lines end with a bare newline on every platform.
"""

from __future__ import annotations

import json

import numpy as np

from .analysis import LABEL_MINUS, LABEL_PLUS, LABEL_UNBOUNDED, LABEL_UNDECIDED

__all__ = [
    "fmt",
    "write_trajectory_csv",
    "write_stability_csv",
    "write_divergence_csv",
    "write_bifurcation_csv",
    "write_basin_csv",
    "write_basin_pgm",
    "write_shift_csv",
    "write_manifest",
]

PGM_BYTES = {LABEL_MINUS: 0, LABEL_UNDECIDED: 127, LABEL_PLUS: 255,
             LABEL_UNBOUNDED: 64}


def fmt(x):
    """Full round-trip decimal text of a float."""
    return format(float(x), ".17g")


def _open_w(path):
    return open(path, "w", newline="\n")


def write_trajectory_csv(path, traj):
    """Header t,x1,...,xn and one row per grid point."""
    n = traj.states.shape[1]
    with _open_w(path) as f:
        f.write("t," + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
        for t, row in zip(traj.times, traj.states):
            f.write(fmt(t) + "," + ",".join(fmt(v) for v in row) + "\n")


def write_stability_csv(path, rows):
    """Rows of (label, eigenvalues, alpha_min, q_star, iota, verdict)."""
    with _open_w(path) as f:
        f.write("label,re1,im1,re2,im2,re3,im3,alpha_min,q_star,iota,verdict\n")
        for label, eigs, alpha_min, q_star, iota, verdict in rows:
            parts = [label]
            for ev in eigs:
                parts += [fmt(ev.real), fmt(ev.imag)]
            parts += [fmt(alpha_min), fmt(q_star), fmt(iota), verdict]
            f.write(",".join(parts) + "\n")


def write_divergence_csv(path, q_values, div_values):
    with _open_w(path) as f:
        f.write("q,divergence\n")
        for q, d in zip(q_values, div_values):
            f.write(f"{fmt(q)},{fmt(d)}\n")


def write_bifurcation_csv(path, bd):
    """One row per maximum: param,ic_id,h,maximum."""
    with _open_w(path) as f:
        f.write("param,ic_id,h,maximum\n")
        for i, value in enumerate(bd.grid):
            for ic_id, _ in bd.ics:
                cell = bd.cells.get((i, ic_id))
                if cell is None:
                    continue
                for m in cell.maxima.values:
                    f.write(f"{fmt(value)},{ic_id},{fmt(bd.h)},{fmt(m)}\n")


def write_basin_csv(path, bg):
    """One row per lattice point: u,v,x1,x2,x3,label."""
    with _open_w(path) as f:
        f.write("u,v,x1,x2,x3,label\n")
        for iv in range(len(bg.v)):
            for iu in range(len(bg.u)):
                x = bg.point(iu, iv)
                f.write(f"{fmt(bg.u[iu])},{fmt(bg.v[iv])},"
                        f"{fmt(x[0])},{fmt(x[1])},{fmt(x[2])},"
                        f"{int(bg.labels[iv, iu])}\n")


def write_basin_pgm(path, bg):
    """Binary greyscale map, one byte per lattice cell.

    Byte values: 0 minus, 127 undecided, 255 plus, 64 unbounded.  The top
    image row is the largest v, so the file views like a plot with v upward
    and u rightward.
    """
    n_v, n_u = bg.labels.shape
    payload = np.empty((n_v, n_u), dtype=np.uint8)
    for code, byte in PGM_BYTES.items():
        payload[bg.labels == code] = byte
    with open(path, "wb") as f:
        f.write(f"P5\n{n_u} {n_v}\n255\n".encode("ascii"))
        f.write(payload[::-1].tobytes())


def write_shift_csv(path, table):
    """One row per (step size, IC): h,ic_id,delta,residual."""
    with _open_w(path) as f:
        f.write("h,ic_id,delta,residual\n")
        for r in table.rows:
            f.write(f"{fmt(r.h)},{r.ic_id},{fmt(r.delta)},{fmt(r.residual)}\n")


def write_manifest(path, subcommand, parameters, outputs, duration, version):
    """JSON record of a run: resolved parameters, outputs, duration."""
    doc = {
        "subcommand": subcommand,
        "parameters": parameters,
        "seed": parameters.get("seed"),
        "outputs": sorted(outputs),
        "tool_version": version,
        "duration_seconds": duration,
    }
    with _open_w(path) as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
