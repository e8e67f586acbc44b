"""Color functions, mixture properties and VOF wall fields.

Phase bookkeeping is stored as (f, V): f is the first-liquid fraction of the
fluid part of a cell, V the fluid volume fraction.  The three color functions
are then xi1 = V*f, xi2 = V*(1-f), xi0 = 1-V, so the partition of unity is
structural and cannot drift.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .lattice import FaceField, Grid, ones_cell, ones_faces

SAMPLES_PER_AXIS = 4  # subcell sampling order for volume/area fractions


# ----------------------------------------------------------------------------
# Analytic shape descriptors (signed distance < 0 inside)
# ----------------------------------------------------------------------------

class Shape:
    """Analytic region with a (pseudo) signed distance, negative inside."""

    def signed_distance(self, pts: np.ndarray) -> np.ndarray:  # (N,3) -> (N,)
        raise NotImplementedError


@dataclass
class HalfSpace(Shape):
    """Points with normal . (x - point) < 0 are inside."""

    normal: tuple[float, float, float]
    point: tuple[float, float, float]

    def signed_distance(self, pts):
        n = np.asarray(self.normal, dtype=float)
        n = n / np.linalg.norm(n)
        return (pts - np.asarray(self.point, dtype=float)) @ n


@dataclass
class Sphere(Shape):
    center: tuple[float, float, float]
    radius: float

    def signed_distance(self, pts):
        return np.linalg.norm(pts - np.asarray(self.center, float), axis=1) - self.radius


@dataclass
class Box(Shape):
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def signed_distance(self, pts):
        lo = np.asarray(self.lo, float)
        hi = np.asarray(self.hi, float)
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        q = np.abs(pts - center) - half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = np.minimum(np.max(q, axis=1), 0.0)
        return outside + inside


@dataclass
class Cylinder(Shape):
    """Infinite circular cylinder along a coordinate axis."""

    axis: int
    center: tuple[float, float]  # coordinates in the two transverse axes
    radius: float

    def signed_distance(self, pts):
        t = [ax for ax in range(3) if ax != self.axis]
        d = pts[:, t] - np.asarray(self.center, float)
        return np.linalg.norm(d, axis=1) - self.radius


@dataclass
class Union(Shape):
    parts: list

    def signed_distance(self, pts):
        return np.min([p.signed_distance(pts) for p in self.parts], axis=0)


@dataclass
class Intersection(Shape):
    parts: list

    def signed_distance(self, pts):
        return np.max([p.signed_distance(pts) for p in self.parts], axis=0)


@dataclass
class Complement(Shape):
    part: Shape

    def signed_distance(self, pts):
        return -self.part.signed_distance(pts)


def _sample_offsets(a: float, k: int = SAMPLES_PER_AXIS) -> np.ndarray:
    """Midpoint sample offsets of a k^3 lattice inside one cell, shape (k^3, 3)."""
    s = (np.arange(k) + 0.5) / k * a
    ox, oy, oz = np.meshgrid(s, s, s, indexing="ij")
    return np.column_stack([ox.ravel(), oy.ravel(), oz.ravel()])


def _cell_corner_points(grid: Grid) -> np.ndarray:
    """Low corners of all cells, shape (n_cells, 3), cell-major x-fastest."""
    a = grid.spacing
    i, j, k = np.meshgrid(np.arange(grid.nx), np.arange(grid.ny),
                          np.arange(grid.nz), indexing="ij")
    return np.column_stack([i.ravel() * a, j.ravel() * a, k.ravel() * a])


def sample_cell_fraction(shape: Shape, grid: Grid, band: float,
                         inside_high: bool = True) -> np.ndarray:
    """Cell-averaged smoothed indicator of a shape.

    The pointwise profile is a linear ramp of width `band` centered on the
    surface (monotone along the outward distance); averaging k^3 midpoint
    samples per cell gives the cell value.  With inside_high the field is 1
    deep inside the shape.
    """
    corners = _cell_corner_points(grid)
    offsets = _sample_offsets(grid.spacing)
    acc = np.zeros(corners.shape[0])
    for off in offsets:
        d = shape.signed_distance(corners + off)
        acc += np.clip(0.5 - d / band, 0.0, 1.0)
    vals = acc / offsets.shape[0]
    if not inside_high:
        vals = 1.0 - vals
    return vals.reshape(grid.shape)


def init_color_from_shape(shape: Shape, grid: Grid, eps_x: float) -> np.ndarray:
    """Color function for a shape: 1 deep inside, 0 deep outside, monotone
    ramp across a band of width eps_x (must be at least one cell)."""
    if eps_x < grid.spacing:
        raise ValueError(
            f"intermediate-region width {eps_x} is below one cell ({grid.spacing})")
    return sample_cell_fraction(shape, grid, eps_x, inside_high=True)


# ----------------------------------------------------------------------------
# Phase sets and mixtures
# ----------------------------------------------------------------------------

@dataclass
class PhaseSet:
    """N color functions plus per-phase physical parameters."""

    colors: list  # list of (nx,ny,nz) arrays, sum to 1 cellwise
    densities: list
    viscosities: list
    sigma: np.ndarray  # (N,N) symmetric, zero diagonal

    def __post_init__(self):
        n = len(self.colors)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.sigma.shape != (n, n):
            raise ValueError("tension matrix shape does not match phase count")
        if not np.allclose(self.sigma, self.sigma.T):
            raise ValueError("tension matrix must be symmetric")

    @property
    def n_phases(self) -> int:
        return len(self.colors)


def partition_residual(phases: PhaseSet) -> float:
    """Max over cells of |sum_a xi_a - 1|."""
    total = np.zeros_like(phases.colors[0])
    for c in phases.colors:
        total = total + c
    return float(np.max(np.abs(total - 1.0)))


def mix_density(f: np.ndarray, V: np.ndarray, rho1: float, rho2: float) -> np.ndarray:
    """rho = V*(rho1*f + rho2*(1-f)); zero in solid cells."""
    return V * (rho1 * f + rho2 * (1.0 - f))


def mix_viscosity(xi1: np.ndarray, xi2: np.ndarray, eta1: float, eta2: float) -> np.ndarray:
    """eta = eta1*xi1 + eta2*xi2; zero where both colors vanish."""
    return eta1 * xi1 + eta2 * xi2


def proper_sigma(sigma01: float, sigma02: float, sigma12: float) -> tuple[float, float, float]:
    """Per-phase coefficients with sigma_ab = sigma_a + sigma_b (three phases).

    Negative outputs are legal (the pairwise formulas stay well-defined) but
    are flagged with a warning.
    """
    s0 = 0.5 * (sigma01 + sigma02 - sigma12)
    s1 = 0.5 * (sigma01 + sigma12 - sigma02)
    s2 = 0.5 * (sigma02 + sigma12 - sigma01)
    if min(s0, s1, s2) < 0.0:
        warnings.warn(
            f"negative proper surface tension coefficient in ({s0}, {s1}, {s2})",
            RuntimeWarning, stacklevel=2)
    return s0, s1, s2


def pair_sigma_matrix(s0: float, s1: float, s2: float) -> np.ndarray:
    """Pairwise tension matrix sigma_ab = sigma_a + sigma_b, zero diagonal."""
    s = (s0, s1, s2)
    m = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            if a != b:
                m[a, b] = s[a] + s[b]
    return m


# ----------------------------------------------------------------------------
# Wall geometry (VOF V and A fields)
# ----------------------------------------------------------------------------

@dataclass
class WallGeometry:
    """Static wall description: color xi0, fluid fraction V, open areas A,
    clamped signed wall distance q0 (positive in the fluid)."""

    xi0: np.ndarray
    V: np.ndarray
    A: FaceField
    q0: np.ndarray
    eps0: float
    shear_cache: dict = field(default_factory=dict, repr=False)

    @property
    def has_wall(self) -> bool:
        return bool(np.any(self.V < 1.0))


def no_wall(grid: Grid, eps0: float | None = None) -> WallGeometry:
    """Fully open domain."""
    V = ones_cell(grid)
    return WallGeometry(xi0=1.0 - V, V=V, A=ones_faces(grid),
                        q0=np.full(grid.shape, eps0 if eps0 else grid.spacing),
                        eps0=eps0 if eps0 else grid.spacing)


def _face_points(grid: Grid, axis: int) -> np.ndarray:
    """Low corners of all faces normal to `axis`, shape (n_faces, 3)."""
    a = grid.spacing
    ns = list(grid.shape)
    ns[axis] += 1
    i, j, k = np.meshgrid(*(np.arange(n) for n in ns), indexing="ij")
    return np.column_stack([i.ravel() * a, j.ravel() * a, k.ravel() * a])


def _sample_face_fraction(shape: Shape, grid: Grid, axis: int, band: float) -> np.ndarray:
    """Face-averaged openness (1 - smoothed wall indicator) by k^2 sampling."""
    a = grid.spacing
    k = SAMPLES_PER_AXIS
    s = (np.arange(k) + 0.5) / k * a
    t = [ax for ax in range(3) if ax != axis]
    o1, o2 = np.meshgrid(s, s, indexing="ij")
    corners = _face_points(grid, axis)
    acc = np.zeros(corners.shape[0])
    for d1, d2 in zip(o1.ravel(), o2.ravel()):
        pts = corners.copy()
        pts[:, t[0]] += d1
        pts[:, t[1]] += d2
        d = shape.signed_distance(pts)
        acc += np.clip(0.5 + d / band, 0.0, 1.0)  # open where outside the wall
    shape_dims = list(grid.shape)
    shape_dims[axis] += 1
    return (acc / (k * k)).reshape(shape_dims)


def wall_fractions(wall: Shape, grid: Grid, eps0: float) -> WallGeometry:
    """Build V, A, xi0 and q0 for a static wall shape.

    V comes from subcell volume sampling of the fluid-accessible region with
    an eps0-wide transition band; A from subface area sampling.  Closed-cell
    consistency is enforced afterwards: every face touching a V=0 cell is
    fully closed, faces between fully fluid cells fully open.
    """
    if eps0 < grid.spacing:
        raise ValueError(
            f"wall band width {eps0} is below one cell ({grid.spacing})")
    V = sample_cell_fraction(wall, grid, eps0, inside_high=False)
    if not np.any(V > 0.0):
        raise ValueError("wall covers the entire domain")
    A = FaceField(*(_sample_face_fraction(wall, grid, ax, eps0) for ax in range(3)))

    closed = V <= 0.0
    for ax, comp in enumerate(A.components()):
        sl_lo = [slice(None)] * 3
        sl_hi = [slice(None)] * 3
        sl_lo[ax] = slice(0, grid.shape[ax])       # face i  <- cell i
        sl_hi[ax] = slice(1, grid.shape[ax] + 1)   # face i+1 <- cell i
        comp[tuple(sl_lo)] = np.where(closed, 0.0, comp[tuple(sl_lo)])
        comp[tuple(sl_hi)] = np.where(closed, 0.0, comp[tuple(sl_hi)])
        interior = [slice(None)] * 3
        interior[ax] = slice(1, grid.shape[ax])
        lo_cell = [slice(None)] * 3
        hi_cell = [slice(None)] * 3
        lo_cell[ax] = slice(0, grid.shape[ax] - 1)
        hi_cell[ax] = slice(1, grid.shape[ax])
        both_full = (V[tuple(lo_cell)] >= 1.0) & (V[tuple(hi_cell)] >= 1.0)
        comp[tuple(interior)] = np.where(both_full, 1.0, comp[tuple(interior)])
        np.clip(comp, 0.0, 1.0, out=comp)

    centers = _cell_corner_points(grid) + 0.5 * grid.spacing
    q0 = np.clip(wall.signed_distance(centers), -eps0, eps0).reshape(grid.shape)
    return WallGeometry(xi0=1.0 - V, V=V, A=A, q0=q0, eps0=eps0)


def make_phase_set(f: np.ndarray, wall: WallGeometry, rho: tuple[float, float],
                   eta: tuple[float, float], sigma_proper: tuple[float, float, float]) -> PhaseSet:
    """Three-phase set (wall, liquid 1, liquid 2) from the (f, V) storage."""
    s0, s1, s2 = sigma_proper
    xi1 = wall.V * f
    xi2 = wall.V * (1.0 - f)
    return PhaseSet(colors=[wall.xi0, xi1, xi2],
                    densities=[0.0, rho[0], rho[1]],
                    viscosities=[0.0, eta[0], eta[1]],
                    sigma=pair_sigma_matrix(s0, s1, s2))
