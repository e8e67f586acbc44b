"""Structured MAC lattice: grids, cell/face fields, discrete operators.

Conventions used throughout the package:
  - cells are cubes of side ``a`` (micrometers); cell (i, j, k) is centered
    at ((i+0.5)a, (j+0.5)a, (k+0.5)a)
  - cell fields are numpy arrays of shape (nx, ny, nz)
  - velocity components live on faces: u.x[i, j, k] sits on the x-face
    between cells (i-1, j, k) and (i, j, k), so u.x has shape (nx+1, ny, nz)
  - the flat cell index is i + nx*(j + ny*k); flattening a cell array with
    ``order="F"`` reproduces it (used by checkpoints and dense solver oracles)

Units: lengths in um, time in us, mass in pg.  In this system 1 cp of
viscosity and 1 kPa of pressure are both numerically 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

PERIODIC = "periodic"
FIXED_PRESSURE = "fixed_pressure"
SYMMETRY = "symmetry"
SOLID = "solid"

_KINDS = (PERIODIC, FIXED_PRESSURE, SYMMETRY, SOLID)


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary condition for one side of one axis."""

    kind: str
    pressure: float | None = None  # kPa, required for fixed_pressure

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == FIXED_PRESSURE and self.pressure is None:
            raise ValueError("fixed_pressure boundary needs a pressure value")


@dataclass(frozen=True)
class Grid:
    """Uniform cubic-cell lattice with per-axis-side boundary kinds."""

    nx: int
    ny: int
    nz: int
    spacing: float  # um
    bcs: tuple[tuple[BoundarySpec, BoundarySpec], ...]  # ((xlo,xhi),(ylo,yhi),(zlo,zhi))

    def __post_init__(self):
        for n, name in ((self.nx, "nx"), (self.ny, "ny"), (self.nz, "nz")):
            if n < 2:
                raise ValueError(f"grid dimension {name}={n} is too small (minimum 2)")
        if not self.spacing > 0:
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")
        if len(self.bcs) != 3:
            raise ValueError("bcs must give (low, high) specs for all three axes")
        for ax, (lo, hi) in enumerate(self.bcs):
            if (lo.kind == PERIODIC) != (hi.kind == PERIODIC):
                raise ValueError(f"axis {ax}: periodic boundary must apply to both sides")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    def periodic(self, axis: int) -> bool:
        return self.bcs[axis][0].kind == PERIODIC

    def face_shape(self, axis: int) -> tuple[int, int, int]:
        s = list(self.shape)
        s[axis] += 1
        return tuple(s)

    def cell_index(self, i: int, j: int, k: int) -> int:
        """Flat index of cell (i, j, k): i + nx*(j + ny*k)."""
        return i + self.nx * (j + self.ny * k)

    def cell_centers(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return (np.arange(n) + 0.5) * self.spacing


def build_grid(dims: Sequence[int], spacing: float,
               bcs: Sequence | None = None) -> Grid:
    """Construct a validated grid.

    ``bcs`` entries may be a single kind string per axis, a (lo, hi) pair of
    kind strings, or BoundarySpec instances.  Defaults to periodic on all axes.
    """
    if bcs is None:
        bcs = (PERIODIC, PERIODIC, PERIODIC)
    if len(bcs) != 3:
        raise ValueError("bcs must have one entry per axis")
    norm = []
    for entry in bcs:
        if isinstance(entry, (str, BoundarySpec)):
            lo = hi = entry
        else:
            lo, hi = entry
        lo = BoundarySpec(lo) if isinstance(lo, str) else lo
        hi = BoundarySpec(hi) if isinstance(hi, str) else hi
        norm.append((lo, hi))
    return Grid(int(dims[0]), int(dims[1]), int(dims[2]), float(spacing), tuple(norm))


# ----------------------------------------------------------------------------
# Field containers
# ----------------------------------------------------------------------------

@dataclass
class FaceField:
    """Three staggered component arrays, one value per x-, y-, z-face."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def copy(self) -> "FaceField":
        return FaceField(self.x.copy(), self.y.copy(), self.z.copy())

    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.x, self.y, self.z)

    def comp(self, axis: int) -> np.ndarray:
        return (self.x, self.y, self.z)[axis]

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(c))) if c.size else 0.0 for c in self.components())

    def allfinite(self) -> bool:
        return all(np.isfinite(c).all() for c in self.components())

    def __add__(self, other: "FaceField") -> "FaceField":
        return FaceField(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "FaceField") -> "FaceField":
        return FaceField(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, s: float) -> "FaceField":
        return FaceField(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__


@dataclass
class CellTensorField:
    """Symmetric 3x3 tensor per cell; six stored components."""

    xx: np.ndarray
    yy: np.ndarray
    zz: np.ndarray
    xy: np.ndarray
    xz: np.ndarray
    yz: np.ndarray

    def comp(self, i: int, j: int) -> np.ndarray:
        key = (min(i, j), max(i, j))
        return {(0, 0): self.xx, (1, 1): self.yy, (2, 2): self.zz,
                (0, 1): self.xy, (0, 2): self.xz, (1, 2): self.yz}[key]

    def trace(self) -> np.ndarray:
        return self.xx + self.yy + self.zz

    def __add__(self, other: "CellTensorField") -> "CellTensorField":
        return CellTensorField(*(a + b for a, b in
                                 zip(self._parts(), other._parts())))

    def _parts(self):
        return (self.xx, self.yy, self.zz, self.xy, self.xz, self.yz)


def zeros_cell(grid: Grid) -> np.ndarray:
    return np.zeros(grid.shape)


def ones_cell(grid: Grid) -> np.ndarray:
    return np.ones(grid.shape)


def zeros_faces(grid: Grid) -> FaceField:
    return FaceField(*(np.zeros(grid.face_shape(ax)) for ax in range(3)))


def ones_faces(grid: Grid) -> FaceField:
    return FaceField(*(np.ones(grid.face_shape(ax)) for ax in range(3)))


def zeros_tensor(grid: Grid) -> CellTensorField:
    return CellTensorField(*(np.zeros(grid.shape) for _ in range(6)))


def flatten_cell(field: np.ndarray) -> np.ndarray:
    """Flatten a cell array using the package's i + nx*(j + ny*k) convention."""
    return np.ravel(field, order="F")


def unflatten_cell(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.reshape(values, grid.shape, order="F")


# ----------------------------------------------------------------------------
# Ghost padding / boundary application
# ----------------------------------------------------------------------------

def pad_cell(field: np.ndarray, grid: Grid, tag: str = "generic") -> np.ndarray:
    """Return the field with one ghost layer per side, filled per axis kind.

    periodic -> wrap; fixed_pressure with a pressure-tagged field -> Dirichlet
    ghost (2*p0 - edge, pinning the boundary-face value to p0); everything
    else -> zero-normal-gradient (edge replication).
    """
    out = np.pad(field, 1, mode="edge")
    for ax in range(3):
        lo, hi = grid.bcs[ax]
        if lo.kind == PERIODIC:
            src_hi = _slice_axis(out, ax, -2)
            src_lo = _slice_axis(out, ax, 1)
            _assign_axis(out, ax, 0, src_hi)
            _assign_axis(out, ax, -1, src_lo)
        elif tag == "pressure":
            if lo.kind == FIXED_PRESSURE:
                _assign_axis(out, ax, 0, 2.0 * lo.pressure - _slice_axis(out, ax, 1))
            if hi.kind == FIXED_PRESSURE:
                _assign_axis(out, ax, -1, 2.0 * hi.pressure - _slice_axis(out, ax, -2))
    return out


def _slice_axis(arr: np.ndarray, axis: int, idx: int) -> np.ndarray:
    sl = [slice(None)] * arr.ndim
    sl[axis] = idx
    return arr[tuple(sl)]


def _assign_axis(arr: np.ndarray, axis: int, idx: int, values) -> None:
    sl = [slice(None)] * arr.ndim
    sl[axis] = idx
    arr[tuple(sl)] = values


def apply_boundary(field, grid: Grid, tag: str = "generic", time: float = 0.0):
    """Apply boundary conditions to a field.

    Cell fields return a ghost-padded copy (shape +2 per axis).  Velocity
    FaceFields are adjusted in place (periodic wrap synchronized, normal
    components zeroed on symmetry/solid sides) and returned.  Requesting
    cell-style padding for a velocity is an unsupported combination
    (velocities are face-located; fixed-pressure Dirichlet has no meaning
    for them).
    """
    if isinstance(field, FaceField):
        if tag == "pressure":
            raise ValueError("pressure tag on a face field is unsupported")
        sync_periodic_faces(field, grid)
        for ax in range(3):
            lo, hi = grid.bcs[ax]
            comp = field.comp(ax)
            if lo.kind in (SYMMETRY, SOLID):
                _assign_axis(comp, ax, 0, 0.0)
            if hi.kind in (SYMMETRY, SOLID):
                _assign_axis(comp, ax, -1, 0.0)
        return field
    if tag == "velocity":
        raise ValueError(
            "unsupported combination: cell-field boundary padding on a "
            "velocity field (fixed-pressure Dirichlet does not apply)")
    return pad_cell(field, grid, tag=tag)


def sync_periodic_faces(u: FaceField, grid: Grid) -> FaceField:
    """Make the duplicated boundary face equal on periodic axes (lo copies hi)."""
    for ax in range(3):
        if grid.periodic(ax):
            comp = u.comp(ax)
            _assign_axis(comp, ax, -1, _slice_axis(comp, ax, 0))
    return u


# ----------------------------------------------------------------------------
# Discrete operators
# ----------------------------------------------------------------------------

def cell_gradient(f: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell-centered gradient: central differences, one-sided at non-periodic
    boundaries, periodic wrap otherwise."""
    a = grid.spacing
    out = []
    for ax in range(3):
        if grid.periodic(ax):
            g = (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * a)
        else:
            g = np.gradient(f, a, axis=ax, edge_order=1)
        out.append(g)
    return tuple(out)


def face_divergence(u: FaceField, A: FaceField | None, grid: Grid) -> np.ndarray:
    """Per-cell divergence of the open-area weighted flux, div(A o u)."""
    a = grid.spacing
    div = np.zeros(grid.shape)
    for ax in range(3):
        flux = u.comp(ax) if A is None else A.comp(ax) * u.comp(ax)
        div += np.diff(flux, axis=ax) / a
    return div


def face_gradient(p_padded: np.ndarray, grid: Grid) -> FaceField:
    """Compact two-point gradient at faces from a ghost-padded cell field."""
    a = grid.spacing
    comps = []
    for ax in range(3):
        lo = _face_block(p_padded, ax, 0)
        hi = _face_block(p_padded, ax, 1)
        comps.append((hi - lo) / a)
    return FaceField(*comps)


def _face_block(padded: np.ndarray, face_axis: int, offset: int,
                keep_axis: int | None = None) -> np.ndarray:
    """Face-aligned block from a padded cell array.

    offset 0 -> cells on the low side of each face along `face_axis`
    (n+1 values), offset 1 -> the high side.  Transverse axes take the
    interior unless listed as `keep_axis` (ghosts retained).
    """
    sl = []
    for ax in range(3):
        if ax == face_axis:
            n = padded.shape[ax] - 2
            sl.append(slice(offset, offset + n + 1))
        elif ax == keep_axis:
            sl.append(slice(None))
        else:
            sl.append(slice(1, -1))
    return padded[tuple(sl)]


def cell_to_faces(c: np.ndarray, grid: Grid, tag: str = "generic") -> FaceField:
    """Interpolate a cell field to all faces by two-cell averages (ghost-aware)."""
    p = pad_cell(c, grid, tag=tag)
    comps = []
    for ax in range(3):
        comps.append(0.5 * (_face_block(p, ax, 0) + _face_block(p, ax, 1)))
    return FaceField(*comps)


def faces_to_cell(u: FaceField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Average staggered components back to cell centers."""
    ux = 0.5 * (u.x[:-1, :, :] + u.x[1:, :, :])
    uy = 0.5 * (u.y[:, :-1, :] + u.y[:, 1:, :])
    uz = 0.5 * (u.z[:, :, :-1] + u.z[:, :, 1:])
    return ux, uy, uz


def scalar_gradient_to_faces(g: np.ndarray, grid: Grid) -> FaceField:
    """d_i g evaluated at i-faces (compact difference of the two adjacent cells)."""
    return face_gradient(pad_cell(g, grid), grid)


def tensor_divergence(T: CellTensorField, grid: Grid) -> FaceField:
    """Divergence of a cell-centered symmetric tensor, located at faces.

    The i-component at i-faces combines the compact difference of T_ii across
    the face with central differences (spacing 2a) of the other components
    after two-cell interpolation onto the face; the latter is identical to
    compact differencing of edge-averaged values.
    """
    a = grid.spacing
    comps = []
    for i in range(3):
        pii = pad_cell(T.comp(i, i), grid)
        force = (_face_block(pii, i, 1) - _face_block(pii, i, 0)) / a
        for j in range(3):
            if j == i:
                continue
            pij = pad_cell(T.comp(i, j), grid)
            fv = 0.5 * (_face_block(pij, i, 0, keep_axis=j)
                        + _face_block(pij, i, 1, keep_axis=j))
            up = _take_range(fv, j, 2, fv.shape[j])
            dn = _take_range(fv, j, 0, fv.shape[j] - 2)
            force += (up - dn) / (2.0 * a)
        comps.append(force)
    return FaceField(*comps)


def _take_range(arr: np.ndarray, axis: int, start: int, stop: int) -> np.ndarray:
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(start, stop)
    return arr[tuple(sl)]


def _pad_one_axis(arr: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    widths = [(0, 0)] * 3
    widths[axis] = (1, 1)
    mode = "wrap" if grid.periodic(axis) else "edge"
    return np.pad(arr, widths, mode=mode)


def tensor_divergence_vof(T: CellTensorField, grid: Grid, A: FaceField,
                          V: np.ndarray) -> FaceField:
    """Open-area weighted divergence of a cell tensor, the flux-form "grad A
    tau" discretization: transverse stress fluxes are exchanged only through
    the open part of each face, so no momentum leaks through walls.

    The i-force at i-faces differences T_ii between the two cell centers
    (the in-plane stress column already carries the wall geometry through
    the color-function gradients) and A-weighted edge fluxes of T_ij along
    transverse directions.  Reduces to tensor_divergence when A is
    identically one.
    """
    a = grid.spacing
    comps = []
    for i in range(3):
        pii = pad_cell(T.comp(i, i), grid)
        force = (_face_block(pii, i, 1) - _face_block(pii, i, 0)) / a
        for j in range(3):
            if j == i:
                continue
            pij = pad_cell(T.comp(i, j), grid)
            fv = 0.5 * (_face_block(pij, i, 0, keep_axis=j)
                        + _face_block(pij, i, 1, keep_axis=j))
            # tau_ij on the (i-face, j-face) edge lattice
            n_j = grid.shape[j]
            edge_tau = 0.5 * (_take_range(fv, j, 0, n_j + 1)
                              + _take_range(fv, j, 1, n_j + 2))
            aj = _pad_one_axis(A.comp(j), grid, i)
            n_i = grid.shape[i]
            edge_a = 0.5 * (_take_range(aj, i, 0, n_i + 1)
                            + _take_range(aj, i, 1, n_i + 2))
            force += np.diff(edge_a * edge_tau, axis=j) / a
        comps.append(force)
    return FaceField(*comps)
