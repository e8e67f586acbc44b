"""Run output: legacy-VTK volume snapshots, CSV time series, checkpoints."""

from __future__ import annotations

import hashlib
import io
import math
import os

import numpy as np

from .lattice import FaceField, faces_to_cell, flatten_cell
from .solver import SimState

TIMESERIES_HEADER = ("t,kinetic_energy,surface_energy,max_divergence,"
                     "contact_angle_deg,interface_thickness,pcg_iterations,"
                     "clamp_mass")

_FMT = "{:.8e}"  # 9 significant digits


def _fmt(v: float) -> str:
    return _FMT.format(float(v))


def write_snapshot(state: SimState, path: str) -> None:
    """ASCII legacy-VTK structured-points file with cell scalars and the
    cell-averaged velocity; the header records time and step."""
    grid = state.grid
    rho = state.rho()
    scalars = [
        ("f", state.f),
        ("V", state.wall.V),
        ("p", state.p),
        ("rho", rho),
        ("xi0", state.wall.xi0),
    ]
    ux, uy, uz = faces_to_cell(state.u)
    buf = io.StringIO()
    buf.write("# vtk DataFile Version 3.0\n")
    buf.write(f"capflow snapshot time={_fmt(state.t)} step={state.step_count}\n")
    buf.write("ASCII\n")
    buf.write("DATASET STRUCTURED_POINTS\n")
    buf.write(f"DIMENSIONS {grid.nx + 1} {grid.ny + 1} {grid.nz + 1}\n")
    buf.write("ORIGIN 0 0 0\n")
    a = grid.spacing
    buf.write(f"SPACING {_fmt(a)} {_fmt(a)} {_fmt(a)}\n")
    buf.write(f"CELL_DATA {grid.n_cells}\n")
    for name, arr in scalars:
        buf.write(f"SCALARS {name} double 1\n")
        buf.write("LOOKUP_TABLE default\n")
        _write_values(buf, flatten_cell(arr))
    buf.write("VECTORS velocity double\n")
    flat = np.column_stack([flatten_cell(ux), flatten_cell(uy), flatten_cell(uz)])
    for row in flat:
        buf.write(f"{_fmt(row[0])} {_fmt(row[1])} {_fmt(row[2])}\n")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(buf.getvalue())


def _write_values(buf, values: np.ndarray, per_line: int = 6) -> None:
    for start in range(0, len(values), per_line):
        buf.write(" ".join(_fmt(v) for v in values[start:start + per_line]))
        buf.write("\n")


def read_snapshot(path: str) -> dict:
    """Parse a snapshot back into arrays (round-trip checks and tooling)."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    header = lines[1]
    dims = tuple(int(v) for v in lines[4].split()[1:4])
    shape = (dims[0] - 1, dims[1] - 1, dims[2] - 1)
    n = shape[0] * shape[1] * shape[2]
    out: dict = {"header": header, "shape": shape}
    i = 0
    while i < len(lines):
        tok = lines[i].split()
        if tok and tok[0] == "SCALARS":
            name = tok[1]
            i += 2  # skip LOOKUP_TABLE
            vals: list[float] = []
            while len(vals) < n:
                vals.extend(float(v) for v in lines[i].split())
                i += 1
            out[name] = np.reshape(np.asarray(vals), shape, order="F")
            continue
        if tok and tok[0] == "VECTORS":
            vecs = np.empty((n, 3))
            for r in range(n):
                vecs[r] = [float(v) for v in lines[i + 1 + r].split()]
            for c, name in enumerate(("velocity_x", "velocity_y", "velocity_z")):
                out[name] = np.reshape(vecs[:, c], shape, order="F")
            i += 1 + n
            continue
        i += 1
    return out


def _format_row(row: dict) -> str:
    cols = []
    for key in TIMESERIES_HEADER.split(","):
        v = row.get(key, float("nan"))
        if v is None or (isinstance(v, float) and math.isnan(v)):
            cols.append("")
        elif key == "pcg_iterations":
            cols.append(str(int(v)))
        else:
            cols.append(_fmt(v))
    return ",".join(cols)


class TimeseriesWriter:
    """CSV writer with the fixed diagnostics header; NaN cells are empty."""

    def __init__(self, stream):
        self.stream = stream
        self.stream.write(TIMESERIES_HEADER + "\n")

    def write_row(self, row: dict) -> None:
        self.stream.write(_format_row(row) + "\n")


def write_timeseries_row(row: dict, stream) -> None:
    """Append one row to an already-headered stream."""
    stream.write(_format_row(row) + "\n")


def config_hash(config_text: str) -> str:
    return hashlib.sha256(config_text.encode("utf-8")).hexdigest()


def checkpoint(state: SimState, config_text: str, path: str) -> None:
    """Binary dump of all evolving fields plus the config and its hash."""
    np.savez_compressed(
        path,
        t=np.float64(state.t),
        step_count=np.int64(state.step_count),
        u_x=state.u.x, u_y=state.u.y, u_z=state.u.z,
        f=state.f, p=state.p,
        cum_clamp_mass=np.float64(state.cum_clamp_mass),
        last_pcg_iters=np.int64(state.last_pcg_iters),
        config_text=np.str_(config_text),
        config_sha256=np.str_(config_hash(config_text)),
    )


class CheckpointError(RuntimeError):
    pass


def restore(path: str, expected_config_text: str | None = None) -> dict:
    """Load a checkpoint; refuses hash mismatches and truncated files.

    Returns a dict with the raw arrays plus the stored config text; the
    caller rebuilds the SimState from its config (see cli.resume).
    """
    import zipfile

    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    required = {"t", "step_count", "u_x", "u_y", "u_z", "f", "p",
                "config_text", "config_sha256"}
    missing = required - set(data.files)
    if missing:
        raise CheckpointError(f"checkpoint {path} is missing fields {sorted(missing)}")
    text = str(data["config_text"])
    stored = str(data["config_sha256"])
    if config_hash(text) != stored:
        raise CheckpointError("checkpoint config hash does not match its contents")
    if expected_config_text is not None and config_hash(expected_config_text) != stored:
        raise CheckpointError("checkpoint was produced by a different config")
    return {k: data[k] for k in data.files}


def apply_checkpoint(state: SimState, payload: dict) -> SimState:
    """Copy checkpoint arrays into a freshly built state."""
    state.u = FaceField(payload["u_x"].copy(), payload["u_y"].copy(),
                        payload["u_z"].copy())
    state.f = payload["f"].copy()
    state.p = payload["p"].copy()
    state.t = float(payload["t"])
    state.step_count = int(payload["step_count"])
    state.cum_clamp_mass = float(payload.get("cum_clamp_mass", 0.0))
    state.last_pcg_iters = int(payload.get("last_pcg_iters", 0))
    return state


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
