"""Advection: donor-cell fraction transport through open areas and
flux-consistent (Rudman-style) momentum advection.

Both use the same first-order upwind fluxes, which is what keeps momentum
advection exact for uniform velocity regardless of the density field.
"""

from __future__ import annotations

import numpy as np

from .lattice import FaceField, Grid, _face_block, cell_to_faces, pad_cell

CFL_LIMIT = 0.5


class CflError(RuntimeError):
    """Advective CFL limit exceeded; the step is rejected."""


def check_cfl(u: FaceField, dt: float, grid: Grid) -> float:
    c = u.max_abs() * dt / grid.spacing
    if c > CFL_LIMIT + 1e-12:
        raise CflError(f"CFL number {c:.3f} exceeds {CFL_LIMIT}")
    return c


def _upwind_face_values(c: np.ndarray, vel: np.ndarray, grid: Grid,
                        axis: int) -> np.ndarray:
    """Upwind cell values of c at the faces normal to `axis`."""
    p = pad_cell(c, grid)
    lo = _face_block(p, axis, 0)
    hi = _face_block(p, axis, 1)
    return np.where(vel > 0.0, lo, hi)


def _mass_fluxes(c: np.ndarray, u: FaceField, A: FaceField,
                 grid: Grid) -> list[np.ndarray]:
    """Donor-cell face fluxes A*u*c_up for a cell quantity c, one per axis."""
    out = []
    for ax in range(3):
        vel = u.comp(ax)
        out.append(A.comp(ax) * vel * _upwind_face_values(c, vel, grid, ax))
    return out


def advect_fraction(f: np.ndarray, u: FaceField, A: FaceField, V: np.ndarray,
                    dt: float, grid: Grid) -> tuple[np.ndarray, float]:
    """One donor-cell update of the liquid fraction.

    Flux form: V df = -dt * div(A u f_up); cells with V = 0 are untouched.
    The result is clamped to [0, 1]; the clamped volume (um^3) is returned
    so the conservation error stays observable.
    """
    check_cfl(u, dt, grid)
    a = grid.spacing
    div = np.zeros(grid.shape)
    for ax, flux in enumerate(_mass_fluxes(f, u, A, grid)):
        div += np.diff(flux, axis=ax) / a
    open_cells = V > 0.0
    V_safe = np.where(open_cells, V, 1.0)
    f_new = np.where(open_cells, f - dt * div / V_safe, f)
    clipped = np.clip(f_new, 0.0, 1.0)
    clamp_mass = float(np.sum(np.abs(f_new - clipped) * V)) * grid.cell_volume
    return clipped, clamp_mass


def advect_density(rho: np.ndarray, u: FaceField, A: FaceField, dt: float,
                   grid: Grid) -> np.ndarray:
    """Donor-cell update of a cell density with the same fluxes as
    advect_fraction (used by tests and the momentum-consistency contract)."""
    a = grid.spacing
    div = np.zeros(grid.shape)
    for ax, flux in enumerate(_mass_fluxes(rho, u, A, grid)):
        div += np.diff(flux, axis=ax) / a
    return rho - dt * div


def momentum_advect(u: FaceField, rho_old: np.ndarray, rho_new: np.ndarray,
                    dt: float, grid: Grid, A: FaceField | None = None,
                    V: np.ndarray | None = None) -> FaceField:
    """Momentum-form upwind advection of rho*u, divided by the new face
    density.

    The mass fluxes for each staggered momentum control volume are two-point
    averages of the donor-cell fluxes of rho_old, so advecting a uniform
    velocity returns it exactly whenever rho_new is the advection of rho_old
    under the same fluxes.  Faces adjacent to closed (V = 0) cells are left
    at zero.
    """
    a = grid.spacing
    if A is None:
        from .lattice import ones_faces

        A = ones_faces(grid)
    fluxes = _mass_fluxes(rho_old, u, A, grid)
    rho_f_old = cell_to_faces(rho_old, grid)
    rho_f_new = cell_to_faces(rho_new, grid)

    comps = []
    for ax in range(3):
        u_ax = u.comp(ax)
        mom_div = np.zeros(grid.face_shape(ax))
        for b in range(3):
            if b == ax:
                # flux surfaces at cell centers along the staggering axis
                F = fluxes[ax]
                G = 0.5 * (np.take(F, range(0, grid.shape[ax]), axis=ax)
                           + np.take(F, range(1, grid.shape[ax] + 1), axis=ax))
                u_lo = np.take(u_ax, range(0, grid.shape[ax]), axis=ax)
                u_hi = np.take(u_ax, range(1, grid.shape[ax] + 1), axis=ax)
                phi = G * np.where(G > 0.0, u_lo, u_hi)
                phi_p = _pad_axis(phi, grid, ax)
                mom_div += np.diff(phi_p, axis=ax) / a
            else:
                # flux surfaces on the edge lattice between b-faces
                Fb = _pad_axis(fluxes[b], grid, ax)
                n_ax = grid.shape[ax]
                G = 0.5 * (np.take(Fb, range(0, n_ax + 1), axis=ax)
                           + np.take(Fb, range(1, n_ax + 2), axis=ax))
                up = _pad_axis(u_ax, grid, b)
                n_b = grid.shape[b]
                u_lo = np.take(up, range(0, n_b + 1), axis=b)
                u_hi = np.take(up, range(1, n_b + 2), axis=b)
                phi = G * np.where(G > 0.0, u_lo, u_hi)
                mom_div += np.diff(phi, axis=b) / a
        denom = rho_f_new.comp(ax)
        open_face = (A.comp(ax) > 0.0) & (denom > 0.0)
        if V is not None:
            vp = pad_cell(V, grid)
            open_face &= (_face_block(vp, ax, 0) > 0.0) & (_face_block(vp, ax, 1) > 0.0)
        bad = (~open_face) & (np.abs(u_ax) > 0.0) & (A.comp(ax) > 0.0) & (denom <= 0.0)
        if np.any(bad):
            raise ValueError("zero face density on an open face with flow")
        safe = np.where(open_face, denom, 1.0)
        ut = (rho_f_old.comp(ax) * u_ax - dt * mom_div) / safe
        comps.append(np.where(open_face, ut, 0.0))
    return FaceField(*comps)


def _pad_axis(arr: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    """One ghost layer along a single axis: wrap if periodic, edge otherwise."""
    widths = [(0, 0)] * 3
    widths[axis] = (1, 1)
    mode = "wrap" if grid.periodic(axis) else "edge"
    return np.pad(arr, widths, mode=mode)
