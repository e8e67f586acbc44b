"""Volumetric force assembly: capillary stress divergence, viscous stress
divergence and wall shear damping, all face-located."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import capillary as cap
from .lattice import (CellTensorField, FaceField, Grid, cell_gradient,
                      cell_to_faces, face_divergence, faces_to_cell,
                      tensor_divergence, zeros_faces)
from .phase import PhaseSet, WallGeometry, proper_sigma


@dataclass(frozen=True)
class ForceParams:
    """Wall shear coefficient and per-term enable flags."""

    c_wall: float = 1.0
    include_capillary: bool = True
    include_viscous: bool = True
    include_wall_shear: bool = True

    def __post_init__(self):
        if self.c_wall < 0:
            raise ValueError("wall shear coefficient must be non-negative")


def strain_rate(u: FaceField, grid: Grid) -> CellTensorField:
    """Symmetric strain tensor at cell centers.

    Diagonal entries use the compact face differences; off-diagonals use
    central differences of the cell-averaged components.
    """
    a = grid.spacing
    exx = np.diff(u.x, axis=0) / a
    eyy = np.diff(u.y, axis=1) / a
    ezz = np.diff(u.z, axis=2) / a
    uc = faces_to_cell(u)
    grads = [cell_gradient(c, grid) for c in uc]
    exy = 0.5 * (grads[0][1] + grads[1][0])
    exz = 0.5 * (grads[0][2] + grads[2][0])
    eyz = 0.5 * (grads[1][2] + grads[2][1])
    return CellTensorField(xx=exx, yy=eyy, zz=ezz, xy=exy, xz=exz, yz=eyz)


def viscous_stress(u: FaceField, eta: np.ndarray, grid: Grid) -> CellTensorField:
    """tau_ij = 2 eta (E_ij - (1/3) div(u) delta_ij) per cell."""
    E = strain_rate(u, grid)
    div_u = face_divergence(u, None, grid)
    third = div_u / 3.0
    two_eta = 2.0 * eta
    return CellTensorField(
        xx=two_eta * (E.xx - third),
        yy=two_eta * (E.yy - third),
        zz=two_eta * (E.zz - third),
        xy=two_eta * E.xy,
        xz=two_eta * E.xz,
        yz=two_eta * E.yz,
    )


def tangential_velocity(u_vec, n_vec):
    """Project a velocity vector onto the plane orthogonal to a unit normal.

    Both arguments are 3-tuples of equally shaped arrays; returns the same.
    """
    dot = sum(u_vec[c] * n_vec[c] for c in range(3))
    return tuple(u_vec[c] - dot * n_vec[c] for c in range(3))


def _wall_band_geometry(wall: WallGeometry, grid: Grid) -> dict:
    """Face-interpolated wall-band data (static per run, cached on the wall)."""
    cache = wall.shear_cache
    if "g_face" in cache:
        return cache
    n0, mag0, _ = cap.interface_normal(wall.xi0, grid)
    in_band = (wall.xi0 > 1e-12) & (wall.xi0 < 1.0 - 1e-12)
    g_masked = np.where(in_band, mag0, 0.0)
    g_face = cell_to_faces(g_masked, grid)
    n_face = [cell_to_faces(n0[c], grid) for c in range(3)]
    units = []
    actives = []
    for ax in range(3):
        comp_n = [n_face[c].comp(ax) for c in range(3)]
        norm = np.sqrt(sum(c * c for c in comp_n))
        safe = np.where(norm > 1e-12, norm, 1.0)
        units.append([np.where(norm > 1e-12, c / safe, 0.0) for c in comp_n])
        actives.append(g_face.comp(ax) > 0.0)
    cache.update(g_face=g_face, unit_normals=units, active=actives)
    return cache


def wall_shear(u: FaceField, wall: WallGeometry, eta: np.ndarray, grid: Grid,
               params: ForceParams = ForceParams()) -> FaceField:
    """Tangential damping force -c_w eta u_par |grad xi0| / eps0 on faces in
    the wall band.  Purely tangential: no component along the wall normal."""
    geo = _wall_band_geometry(wall, grid)
    eta_face = cell_to_faces(eta, grid)
    uc = faces_to_cell(u)
    uc_face = [cell_to_faces(uc[c], grid) for c in range(3)]

    out = zeros_faces(grid)
    for ax in range(3):
        if not np.any(geo["active"][ax]):
            continue
        unit_n = geo["unit_normals"][ax]
        u_here = [uc_face[c].comp(ax) for c in range(3)]
        u_here[ax] = u.comp(ax)  # own component is exact on its faces
        u_par = tangential_velocity(tuple(u_here), tuple(unit_n))
        strength = (params.c_wall * eta_face.comp(ax)
                    * geo["g_face"].comp(ax) / wall.eps0)
        out.comp(ax)[...] = -strength * u_par[ax]
    return out


def zero_closed_faces(u: FaceField, wall: WallGeometry) -> FaceField:
    """Hard-zero velocity on closed faces (A = 0), in place."""
    for ax in range(3):
        comp = u.comp(ax)
        comp[wall.A.comp(ax) <= 0.0] = 0.0
    return u


def capillary_force(phases: PhaseSet, wall: WallGeometry, grid: Grid,
                    cap_params: cap.CapillaryParams) -> FaceField:
    """Face-located capillary force (the K contribution) for the selected
    formulation.

    The pairwise route negates capillary_force_multi, whose contract is the
    momentum-balance form alongside +grad p; all routes therefore return
    div(stress)-consistent signs and agree on open domains."""
    form = cap_params.formulation
    if form == cap.N_PHASE:
        return -1.0 * cap.capillary_force_multi(phases, grid, cap_params)
    s0, s1, s2 = proper_sigma(phases.sigma[0, 1], phases.sigma[0, 2],
                              phases.sigma[1, 2])
    if form == cap.WALL_SYMMETRIC:
        stress = cap.capillary_stress_wall(phases.colors[1], phases.colors[2],
                                           s1, s2, grid, cap_params)
    elif form == cap.TWO_PHASE:
        stress = cap.capillary_stress_two(phases.colors[1],
                                          float(phases.sigma[1, 2]),
                                          grid, cap_params)
    else:
        raise ValueError(f"unknown formulation {form!r}")
    return tensor_divergence(stress, grid)


def total_force(phases: PhaseSet, wall: WallGeometry, u: FaceField,
                eta: np.ndarray, grid: Grid,
                params: ForceParams = ForceParams(),
                cap_params: cap.CapillaryParams = cap.CapillaryParams()) -> FaceField:
    """Total face force K = div(capillary stress) + div(viscous stress)
    + wall shear, zeroed on closed faces."""
    K = zeros_faces(grid)
    if params.include_capillary:
        K = K + capillary_force(phases, wall, grid, cap_params)
    if params.include_viscous:
        K = K + tensor_divergence(viscous_stress(u, eta, grid), grid)
    if params.include_wall_shear and wall.has_wall:
        K = K + wall_shear(u, wall, eta, grid, params)
    for ax in range(3):
        comp = K.comp(ax)
        comp[wall.A.comp(ax) <= 0.0] = 0.0
    return K
