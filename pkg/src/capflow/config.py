"""Scenario configuration: YAML parsing, validation, serialization and
initial-state construction.

Keys carry their units (``*_um``, ``*_us``, ``sigma*_pg_per_us2``, ...) so a
config file is an auditable transcription of run parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import yaml

from . import phase
from .capillary import FORMULATIONS, CapillaryParams, WALL_SYMMETRIC
from .forces import ForceParams
from .lattice import (FIXED_PRESSURE, PERIODIC, SOLID, SYMMETRY, BoundarySpec,
                      Grid, build_grid)
from .pressure import PcgConfig
from .solver import PhysParams, RunConfig, SimState, initial_state

REQUIRED_BLOCKS = ("grid", "phases", "shapes", "numerics")
_BC_KINDS = {PERIODIC, FIXED_PRESSURE, SYMMETRY, SOLID}


class ConfigError(ValueError):
    """Config parsing/validation failure; message lists every problem."""


@dataclass
class ScenarioConfig:
    """Validated scenario: grid, phase parameters, shapes, numerics, output."""

    raw: dict
    grid: Grid
    phys: PhysParams
    liquid1_shape: phase.Shape
    wall_shape: phase.Shape | None
    eps12: float
    eps0: float
    dt: float | str
    end_time: float
    cadence: float
    pcg: PcgConfig
    formulation: str
    c_wall: float
    reproducible: bool
    output_dir: str
    output_formats: tuple[str, ...]
    checkpoint_every: float
    max_steps: int | None = None

    def run_config(self) -> RunConfig:
        return RunConfig(
            dt=self.dt,
            end_time=self.end_time,
            cadence=self.cadence,
            max_steps=self.max_steps,
            forces=ForceParams(c_wall=self.c_wall),
            cap=CapillaryParams(formulation=self.formulation),
            pcg=self.pcg,
            reproducible=self.reproducible,
        )


def load_config(path: str) -> ScenarioConfig:
    """Parse and validate a scenario file; all errors reported together."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, source=path)


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: YAML parse error: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    return config_from_dict(data, source=source)


def config_from_dict(data: dict, source: str = "<dict>") -> ScenarioConfig:
    errors: list[str] = []
    for block in REQUIRED_BLOCKS:
        if block not in data:
            errors.append(f"missing required block '{block}'")
    if errors:
        raise ConfigError(f"{source}: " + "; ".join(errors))

    grid = _parse_grid(data["grid"], errors)
    phys = _parse_phases(data["phases"], errors)
    shapes = data.get("shapes") or {}
    liquid1 = wall = None
    if "liquid1" not in shapes:
        errors.append("shapes: missing 'liquid1' region")
    else:
        liquid1 = _parse_shape(shapes["liquid1"], "shapes.liquid1", errors)
    if "wall" in shapes and shapes["wall"] is not None:
        wall = _parse_shape(shapes["wall"], "shapes.wall", errors)
    extra = set(shapes) - {"liquid1", "wall"}
    if extra:
        errors.append(f"shapes: unknown regions {sorted(extra)} "
                      "(one wall phase or none)")

    num = data.get("numerics") or {}
    out = data.get("output") or {}
    spacing = grid.spacing if grid is not None else 1.0

    dt = num.get("dt_us", 0.001)
    if dt != "auto":
        try:
            dt = float(dt)
            if dt <= 0:
                errors.append("numerics.dt_us must be positive or 'auto'")
        except (TypeError, ValueError):
            errors.append(f"numerics.dt_us: bad value {dt!r}")
    end_time = float(num.get("end_time_us", 1.0))
    if end_time < 0:
        errors.append("numerics.end_time_us must be non-negative")
    eps12 = float(num.get("eps12_um", spacing))
    eps0 = float(num.get("eps0_um", spacing))
    if grid is not None and eps12 < grid.spacing:
        errors.append("numerics.eps12_um must be at least one cell")
    if grid is not None and eps0 < grid.spacing:
        errors.append("numerics.eps0_um must be at least one cell")
    formulation = num.get("formulation", WALL_SYMMETRIC)
    if formulation not in FORMULATIONS:
        errors.append(f"numerics.formulation must be one of {FORMULATIONS}")
    c_wall = float(num.get("c_wall", 1.0))
    if c_wall < 0:
        errors.append("numerics.c_wall must be non-negative")
    try:
        pcg = PcgConfig(tol=float(num.get("pcg_tol", 1e-8)),
                        max_iter=int(num.get("pcg_max_iter", 4000)))
    except ValueError as exc:
        errors.append(f"numerics: {exc}")
        pcg = PcgConfig()
    max_steps = num.get("max_steps")
    if max_steps is not None:
        max_steps = int(max_steps)

    cadence = float(out.get("cadence_us", max(end_time / 10.0, 1e-9) if end_time else 1.0))
    formats = tuple(out.get("formats", ("csv",)))
    for fmt in formats:
        if fmt not in ("csv", "vtk"):
            errors.append(f"output.formats: unknown format {fmt!r}")

    if errors:
        raise ConfigError(f"{source}: " + "; ".join(errors))

    return ScenarioConfig(
        raw=data,
        grid=grid,
        phys=phys,
        liquid1_shape=liquid1,
        wall_shape=wall,
        eps12=eps12,
        eps0=eps0,
        dt=dt,
        end_time=end_time,
        cadence=cadence,
        pcg=pcg,
        formulation=formulation,
        c_wall=c_wall,
        reproducible=bool(num.get("reproducible", True)),
        output_dir=str(out.get("directory", "out")),
        output_formats=formats,
        checkpoint_every=float(out.get("checkpoint_every_us", 0.0)),
        max_steps=max_steps,
    )


def _parse_grid(block: Any, errors: list[str]) -> Grid | None:
    if not isinstance(block, dict):
        errors.append("grid: must be a mapping")
        return None
    dims = block.get("dims")
    spacing = block.get("spacing_um")
    if not (isinstance(dims, (list, tuple)) and len(dims) == 3):
        errors.append("grid.dims must be [nx, ny, nz]")
        return None
    if spacing is None or not float(spacing) > 0:
        errors.append("grid.spacing_um must be positive")
        return None
    bc_block = block.get("bc", {}) or {}
    bcs = []
    for ax, name in enumerate("xyz"):
        entry = bc_block.get(name, PERIODIC)
        try:
            bcs.append(_parse_bc_pair(entry, f"grid.bc.{name}"))
        except ConfigError as exc:
            errors.append(str(exc))
            bcs.append((BoundarySpec(PERIODIC), BoundarySpec(PERIODIC)))
    try:
        return build_grid([int(d) for d in dims], float(spacing), bcs)
    except ValueError as exc:
        errors.append(f"grid: {exc}")
        return None


def _parse_bc_pair(entry: Any, where: str):
    if isinstance(entry, str) or isinstance(entry, dict):
        lo = hi = _parse_bc_one(entry, where)
    elif isinstance(entry, (list, tuple)) and len(entry) == 2:
        lo = _parse_bc_one(entry[0], where)
        hi = _parse_bc_one(entry[1], where)
    else:
        raise ConfigError(f"{where}: expected a kind or [lo, hi] pair")
    return (lo, hi)


def _parse_bc_one(entry: Any, where: str) -> BoundarySpec:
    if isinstance(entry, str):
        if entry not in _BC_KINDS:
            raise ConfigError(f"{where}: unknown boundary kind {entry!r}")
        if entry == FIXED_PRESSURE:
            raise ConfigError(f"{where}: fixed_pressure needs pressure_kpa")
        return BoundarySpec(entry)
    if isinstance(entry, dict):
        kind = entry.get("kind")
        if kind not in _BC_KINDS:
            raise ConfigError(f"{where}: unknown boundary kind {kind!r}")
        p = entry.get("pressure_kpa")
        if kind == FIXED_PRESSURE and p is None:
            raise ConfigError(f"{where}: fixed_pressure needs pressure_kpa")
        return BoundarySpec(kind, None if p is None else float(p))
    raise ConfigError(f"{where}: bad boundary entry {entry!r}")


def _parse_phases(block: Any, errors: list[str]) -> PhysParams:
    if not isinstance(block, dict):
        errors.append("phases: must be a mapping")
        return PhysParams()
    rho = block.get("rho_pg_per_um3", [1.0, 1.0])
    eta = block.get("eta_cp", [0.1, 0.1])
    if not (isinstance(rho, (list, tuple)) and len(rho) == 2):
        errors.append("phases.rho_pg_per_um3 must be [rho1, rho2]")
        rho = [1.0, 1.0]
    if not (isinstance(eta, (list, tuple)) and len(eta) == 2):
        errors.append("phases.eta_cp must be [eta1, eta2]")
        eta = [0.1, 0.1]
    if min(float(r) for r in rho) <= 0:
        errors.append("phases.rho_pg_per_um3 entries must be positive")
    if min(float(e) for e in eta) < 0:
        errors.append("phases.eta_cp entries must be non-negative")

    sigma0 = 0.0
    if "sigma_proper_pg_per_us2" in block:
        sp = block["sigma_proper_pg_per_us2"]
        if not (isinstance(sp, (list, tuple)) and len(sp) == 2):
            errors.append("phases.sigma_proper_pg_per_us2 must be [sigma1, sigma2]")
            sp = [1.0, 1.0]
        s1, s2 = float(sp[0]), float(sp[1])
    elif "sigma_matrix_pg_per_us2" in block:
        m = np.asarray(block["sigma_matrix_pg_per_us2"], dtype=float)
        if m.shape != (3, 3):
            errors.append("phases.sigma_matrix_pg_per_us2 must be 3x3")
            s1 = s2 = 1.0
        elif not np.allclose(m, m.T):
            errors.append("phases.sigma_matrix_pg_per_us2 must be symmetric")
            s1 = s2 = 1.0
        elif np.any(m < 0):
            errors.append("phases.sigma_matrix_pg_per_us2 entries must be >= 0")
            s1 = s2 = 1.0
        else:
            sigma0, s1, s2 = phase.proper_sigma(m[0, 1], m[0, 2], m[1, 2])
    else:
        errors.append("phases: need sigma_proper_pg_per_us2 or sigma_matrix_pg_per_us2")
        s1 = s2 = 1.0
    return PhysParams(rho=(float(rho[0]), float(rho[1])),
                      eta=(float(eta[0]), float(eta[1])),
                      sigma_proper=(s1, s2), sigma0=sigma0)


_SHAPE_KINDS = ("halfspace", "sphere", "box", "cylinder", "union",
                "intersection", "complement")


def _parse_shape(entry: Any, where: str, errors: list[str]) -> phase.Shape | None:
    try:
        return shape_from_dict(entry)
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"{where}: {exc}")
        return None


def shape_from_dict(entry: dict) -> phase.Shape:
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ValueError(f"shape entry must be a mapping with 'kind', got {entry!r}")
    kind = entry["kind"]
    if kind == "halfspace":
        return phase.HalfSpace(normal=tuple(entry["normal"]),
                               point=tuple(entry["point_um"]))
    if kind == "sphere":
        return phase.Sphere(center=tuple(entry["center_um"]),
                            radius=float(entry["radius_um"]))
    if kind == "box":
        return phase.Box(lo=tuple(entry["lo_um"]), hi=tuple(entry["hi_um"]))
    if kind == "cylinder":
        return phase.Cylinder(axis=int(entry["axis"]),
                              center=tuple(entry["center_um"]),
                              radius=float(entry["radius_um"]))
    if kind in ("union", "intersection"):
        parts = [shape_from_dict(p) for p in entry["parts"]]
        if not parts:
            raise ValueError(f"{kind} needs at least one part")
        return phase.Union(parts) if kind == "union" else phase.Intersection(parts)
    if kind == "complement":
        return phase.Complement(shape_from_dict(entry["part"]))
    raise ValueError(f"unknown shape kind {kind!r} (expected one of {_SHAPE_KINDS})")


def serialize_config(cfg: ScenarioConfig) -> str:
    """YAML text whose reload reproduces the scenario (round-trip fixed point)."""
    return yaml.safe_dump(cfg.raw, sort_keys=True)


def build_initial_state(cfg: ScenarioConfig) -> SimState:
    """Wall geometry, initial fraction field and quiescent velocity."""
    grid = cfg.grid
    if cfg.wall_shape is not None:
        wall = phase.wall_fractions(cfg.wall_shape, grid, cfg.eps0)
    else:
        wall = phase.no_wall(grid, cfg.eps0)
    f = phase.init_color_from_shape(cfg.liquid1_shape, grid, cfg.eps12)
    p0 = None
    for lo, hi in grid.bcs:
        for spec in (lo, hi):
            if spec.kind == FIXED_PRESSURE:
                p0 = spec.pressure
    return initial_state(grid, f, wall, cfg.phys, cfg.eps12, p0=p0)
