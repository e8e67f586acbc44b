"""Variable-coefficient pressure Poisson solve and velocity projection.

The operator is the negated discrete divergence of the open-area weighted
pressure flux, op(p) = -div(A dt/rho grad p), assembled cellwise from face
coefficients A_f*dt/(rho_f*a^2).  It is symmetric positive semi-definite;
fixed-pressure boundaries are folded in by ghost elimination, closed faces
carry zero coefficient, and solid (V=0) cells are identity rows.  The
projection applies exactly the same face gradient and densities, so the
post-projection divergence equals the linear-solve residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import (FIXED_PRESSURE, FaceField, Grid, _assign_axis,
                      _slice_axis, cell_to_faces, face_divergence,
                      face_gradient, pad_cell)


class PcgError(RuntimeError):
    """Conjugate-gradient failure; carries the last relative residual."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


try:  # optional compiled stencil; the numpy path below is the reference
    from numba import njit as _njit

    @_njit(cache=True, fastmath=False)
    def _matvec7(diag, clx, chx, cly, chy, clz, chz, solid, p, out):
        nx, ny, nz = p.shape
        for i in range(nx):
            im = i - 1 if i > 0 else nx - 1
            ip = i + 1 if i < nx - 1 else 0
            for j in range(ny):
                jm = j - 1 if j > 0 else ny - 1
                jp = j + 1 if j < ny - 1 else 0
                for k in range(nz):
                    km = k - 1 if k > 0 else nz - 1
                    kp = k + 1 if k < nz - 1 else 0
                    if solid[i, j, k]:
                        out[i, j, k] = p[i, j, k]
                        continue
                    acc = diag[i, j, k] * p[i, j, k]
                    acc -= (chx[i, j, k] * p[ip, j, k]
                            + clx[i, j, k] * p[im, j, k])
                    acc -= (chy[i, j, k] * p[i, jp, k]
                            + cly[i, j, k] * p[i, jm, k])
                    acc -= (chz[i, j, k] * p[i, j, kp]
                            + clz[i, j, k] * p[i, j, km])
                    out[i, j, k] = acc

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is present in normal installs
    _HAVE_NUMBA = False


@dataclass
class PcgConfig:
    tol: float = 1e-8
    max_iter: int = 4000
    preconditioner: str = "diagonal"  # diagonal | none

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("PCG tolerance must be positive")
        if self.preconditioner not in ("diagonal", "none"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class PoissonOperator:
    """Matrix-free 7-point operator with per-cell low/high face coefficients."""

    grid: Grid
    c_lo: list  # per axis, coefficient of the face below each cell
    c_hi: list  # per axis, coefficient of the face above each cell
    diag: np.ndarray
    b_extra: np.ndarray  # Dirichlet contribution to the right-hand side
    solid: np.ndarray  # bool, identity rows
    has_nullspace: bool

    def apply(self, p: np.ndarray) -> np.ndarray:
        if _HAVE_NUMBA:
            out = np.empty_like(p)
            _matvec7(self.diag, self.c_lo[0], self.c_hi[0], self.c_lo[1],
                     self.c_hi[1], self.c_lo[2], self.c_hi[2], self.solid,
                     np.ascontiguousarray(p), out)
            return out
        q = self.diag * p
        for ax in range(3):
            up = np.roll(p, -1, axis=ax)
            dn = np.roll(p, 1, axis=ax)
            q -= self.c_hi[ax] * up + self.c_lo[ax] * dn
        return np.where(self.solid, p, q)

    def prepare_rhs(self, rhs: np.ndarray) -> np.ndarray:
        b = np.where(self.solid, 0.0, rhs + self.b_extra)
        if self.has_nullspace:
            fluid = ~self.solid
            n_fluid = int(np.count_nonzero(fluid))
            if n_fluid:
                b = np.where(fluid, b - np.sum(b[fluid]) / n_fluid, 0.0)
        return b

    def to_dense(self) -> np.ndarray:
        """Materialize the operator (column by column) for small-grid oracles."""
        n = self.grid.n_cells
        out = np.empty((n, n))
        basis = np.zeros(self.grid.shape)
        for col in range(n):
            basis[...] = 0.0
            idx = np.unravel_index(col, self.grid.shape, order="F")
            basis[idx] = 1.0
            out[:, col] = np.ravel(self.apply(basis), order="F")
        return out


def assemble_poisson(rho: np.ndarray, A: FaceField, V: np.ndarray, dt: float,
                     grid: Grid) -> PoissonOperator:
    """Build the projection operator from densities and open-area fractions."""
    a2 = grid.spacing**2
    rho_f = cell_to_faces(rho, grid)
    solid = V <= 0.0
    c_lo, c_hi = [], []
    diag = np.zeros(grid.shape)
    b_extra = np.zeros(grid.shape)
    any_dirichlet = False

    for ax in range(3):
        A_ax = np.asarray(A.comp(ax), dtype=float)
        rf = rho_f.comp(ax)
        open_face = A_ax > 0.0
        if np.any(open_face & (rf <= 0.0)):
            raise ValueError("zero face density on an open face")
        cf = np.where(open_face, A_ax * dt / np.where(rf > 0, rf, 1.0) / a2, 0.0)

        lo_bc, hi_bc = grid.bcs[ax]
        n = grid.shape[ax]
        if grid.periodic(ax):
            _assign_axis(cf, ax, -1, _slice_axis(cf, ax, 0))
        else:
            if lo_bc.kind == FIXED_PRESSURE:
                c_d = _slice_axis(cf, ax, 0)
                first = _cell_slab(grid, ax, 0)
                diag[first] += 2.0 * c_d
                b_extra[first] += 2.0 * c_d * lo_bc.pressure
                any_dirichlet = any_dirichlet or bool(np.any(c_d > 0))
            if hi_bc.kind == FIXED_PRESSURE:
                c_d = _slice_axis(cf, ax, -1)
                last = _cell_slab(grid, ax, n - 1)
                diag[last] += 2.0 * c_d
                b_extra[last] += 2.0 * c_d * hi_bc.pressure
                any_dirichlet = any_dirichlet or bool(np.any(c_d > 0))
            _assign_axis(cf, ax, 0, 0.0)
            _assign_axis(cf, ax, -1, 0.0)

        lo = np.take(cf, range(0, n), axis=ax)
        hi = np.take(cf, range(1, n + 1), axis=ax)
        # no coupling into solid cells, from either side
        lo = np.where(solid | _shifted(solid, ax, 1), 0.0, lo)
        hi = np.where(solid | _shifted(solid, ax, -1), 0.0, hi)
        c_lo.append(lo)
        c_hi.append(hi)
        diag += lo + hi

    isolated = (~solid) & (diag <= 0.0)
    solid_rows = solid | isolated
    diag = np.where(solid_rows, 1.0, diag)
    b_extra = np.where(solid_rows, 0.0, b_extra)
    for ax in range(3):
        c_lo[ax] = np.where(solid_rows, 0.0, c_lo[ax])
        c_hi[ax] = np.where(solid_rows, 0.0, c_hi[ax])
    return PoissonOperator(grid=grid, c_lo=c_lo, c_hi=c_hi, diag=diag,
                           b_extra=b_extra, solid=solid_rows,
                           has_nullspace=not any_dirichlet)


def _cell_slab(grid: Grid, axis: int, index: int):
    sl = [slice(None)] * 3
    sl[axis] = index
    return tuple(sl)


def _shifted(mask: np.ndarray, axis: int, shift: int) -> np.ndarray:
    """Neighbor mask with roll; boundary coefficients are zeroed separately."""
    return np.roll(mask, shift, axis=axis)


def pcg_solve(op: PoissonOperator, rhs: np.ndarray,
              cfg: PcgConfig = PcgConfig(),
              x0: np.ndarray | None = None) -> tuple[np.ndarray, int, float]:
    """Preconditioned conjugate gradients on op p = prepared rhs.

    Returns (p, iterations, relative residual).  Deterministic for fixed
    inputs; raises PcgError on non-convergence.
    """
    b = op.prepare_rhs(rhs)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(op.grid.shape), 0, 0.0

    x = np.zeros(op.grid.shape) if x0 is None else x0.copy()
    if op.has_nullspace:
        fluid = ~op.solid
        x = np.where(fluid, x, 0.0)
    r = b - op.apply(x)
    if cfg.preconditioner == "diagonal":
        inv_diag = 1.0 / op.diag
        z = r * inv_diag
    else:
        inv_diag = None
        z = r.copy()
    d = z.copy()
    rz = float(np.sum(r * z))
    res = float(np.linalg.norm(r))
    it = 0
    while res > cfg.tol * b_norm:
        if it >= cfg.max_iter:
            raise PcgError(
                f"PCG did not converge in {cfg.max_iter} iterations "
                f"(relative residual {res / b_norm:.3e})",
                residual=res / b_norm, iterations=it)
        Ad = op.apply(d)
        dAd = float(np.sum(d * Ad))
        if dAd <= 0.0:
            raise PcgError("operator lost positive definiteness",
                           residual=res / b_norm, iterations=it)
        alpha = rz / dAd
        x = x + alpha * d
        r = r - alpha * Ad
        z = r * inv_diag if inv_diag is not None else r
        rz_new = float(np.sum(r * z))
        d = z + (rz_new / rz) * d
        rz = rz_new
        res = float(np.linalg.norm(r))
        it += 1

    if op.has_nullspace:
        fluid = ~op.solid
        n_fluid = int(np.count_nonzero(fluid))
        if n_fluid:
            x = np.where(fluid, x - np.sum(x[fluid]) / n_fluid, 0.0)
    return x, it, res / b_norm


def project(u_star: FaceField, p: np.ndarray, rho: np.ndarray, A: FaceField,
            dt: float, grid: Grid) -> FaceField:
    """u_new = u* - dt/rho grad p on open faces; closed faces stay zero."""
    gp = face_gradient(pad_cell(p, grid, tag="pressure"), grid)
    rho_f = cell_to_faces(rho, grid)
    comps = []
    for ax in range(3):
        rf = rho_f.comp(ax)
        open_face = (A.comp(ax) > 0.0) & (rf > 0.0)
        safe = np.where(rf > 0.0, rf, 1.0)
        upd = u_star.comp(ax) - dt * gp.comp(ax) / safe
        comps.append(np.where(open_face, upd, 0.0))
    return FaceField(*comps)


def projection_rhs(u_star: FaceField, A: FaceField, grid: Grid) -> np.ndarray:
    """Right-hand side for the SPD operator: -div(A o u*)."""
    return -face_divergence(u_star, A, grid)
