"""SMAC time integration: fraction advection, momentum advection, explicit
forces, pressure projection and wall zeroing, with step-size checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics
from .capillary import CapillaryParams, surface_energy_sym3
from .forces import ForceParams, total_force, zero_closed_faces
from .lattice import (FaceField, Grid, apply_boundary, cell_to_faces,
                      face_divergence, zeros_cell, zeros_faces)
from .phase import (PhaseSet, WallGeometry, make_phase_set, mix_density,
                    mix_viscosity)
from .pressure import PcgConfig, assemble_poisson, pcg_solve, project, projection_rhs
from .transport import advect_fraction, momentum_advect


class SolverError(RuntimeError):
    """Numerical abort (NaN detection or propagated solver failure)."""


@dataclass
class PhysParams:
    """Per-liquid physical constants in (um, us, pg) units."""

    rho: tuple[float, float] = (1.0, 1.0)  # pg/um^3
    eta: tuple[float, float] = (0.1, 0.1)  # cp == pg/(um us)
    sigma_proper: tuple[float, float] = (1.0, 1.0)  # liquid-wall proper pair, pg/us^2
    sigma0: float = 0.0  # wall proper coefficient (drops out for static walls)

    @property
    def sigma12(self) -> float:
        return self.sigma_proper[0] + self.sigma_proper[1]


@dataclass
class RunConfig:
    dt: float | str = 0.001  # us, or "auto"
    end_time: float = 1.0
    cadence: float = 0.1  # us between diagnostic samples
    max_steps: int | None = None
    forces: ForceParams = field(default_factory=ForceParams)
    cap: CapillaryParams = field(default_factory=CapillaryParams)
    pcg: PcgConfig = field(default_factory=PcgConfig)
    reproducible: bool = True
    check_divergence: bool = False
    auto_dt_safety: float = 0.5
    log_stream: object = None  # progress lines; None silences

    def resolved_dt(self, state: "SimState") -> float:
        if self.dt == "auto":
            return self.auto_dt_safety * stable_dt(state)
        return float(self.dt)


@dataclass
class SimState:
    """Complete solver state: velocity, liquid fraction, pressure, wall."""

    grid: Grid
    u: FaceField
    f: np.ndarray
    p: np.ndarray
    wall: WallGeometry
    params: PhysParams
    eps12: float
    t: float = 0.0
    step_count: int = 0
    last_pcg_iters: int = 0
    last_residual: float = 0.0
    cum_clamp_mass: float = 0.0

    def rho(self, f: np.ndarray | None = None) -> np.ndarray:
        ff = self.f if f is None else f
        return mix_density(ff, self.wall.V, *self.params.rho)

    def eta(self, f: np.ndarray | None = None) -> np.ndarray:
        ff = self.f if f is None else f
        xi1 = self.wall.V * ff
        xi2 = self.wall.V * (1.0 - ff)
        return mix_viscosity(xi1, xi2, *self.params.eta)

    def phases(self, f: np.ndarray | None = None) -> PhaseSet:
        ff = self.f if f is None else f
        return make_phase_set(ff, self.wall, self.params.rho, self.params.eta,
                              (self.params.sigma0, *self.params.sigma_proper))

    def copy_shallow(self) -> "SimState":
        return replace(self, u=self.u.copy(), f=self.f.copy(), p=self.p.copy())


def initial_state(grid: Grid, f: np.ndarray, wall: WallGeometry,
                  params: PhysParams, eps12: float,
                  p0: float | None = None) -> SimState:
    p = zeros_cell(grid) if p0 is None else np.full(grid.shape, float(p0))
    u = zeros_faces(grid)
    zero_closed_faces(u, wall)
    return SimState(grid=grid, u=u, f=np.clip(f, 0.0, 1.0), p=p, wall=wall,
                    params=params, eps12=eps12)


def stable_dt(state: SimState) -> float:
    """Explicit step limits: advective CFL, viscous diffusion, capillary wave."""
    grid = state.grid
    a = grid.spacing
    limits = []
    umax = state.u.max_abs()
    if umax > 0.0:
        limits.append(0.5 * a / umax)
    eta_max = max(state.params.eta)
    fluid = state.wall.V > 0.0
    rho_fluid = state.rho()[fluid]
    if eta_max > 0.0 and rho_fluid.size:
        limits.append(0.25 * float(np.min(rho_fluid[rho_fluid > 0])) * a * a / eta_max)
    sigma_max = max(state.params.sigma12, max(state.params.sigma_proper))
    if sigma_max > 0.0 and rho_fluid.size:
        rho_bar = float(np.mean(rho_fluid[rho_fluid > 0]))
        limits.append(math.sqrt(rho_bar * a**3 / (4.0 * math.pi * sigma_max)))
    return min(limits) if limits else math.inf


def step(state: SimState, cfg: RunConfig) -> SimState:
    """Advance one time step; returns a fresh state.

    Order: fraction advection -> mixture update -> momentum advection ->
    explicit forces on the old fields -> Poisson solve -> projection ->
    wall zeroing and boundary application.
    """
    grid = state.grid
    dt = cfg.resolved_dt(state)
    wall = state.wall
    A, V = wall.A, wall.V

    f_old = state.f
    u_old = state.u
    rho_old = state.rho(f_old)
    eta_old = state.eta(f_old)

    f_new, clamp = advect_fraction(f_old, u_old, A, V, dt, grid)
    rho_new = state.rho(f_new)

    u_tilde = momentum_advect(u_old, rho_old, rho_new, dt, grid, A=A, V=V)

    K = total_force(state.phases(f_old), wall, u_old, eta_old, grid,
                    params=cfg.forces, cap_params=cfg.cap)
    rho_f = cell_to_faces(rho_new, grid)
    comps = []
    for ax in range(3):
        rf = rho_f.comp(ax)
        open_face = (A.comp(ax) > 0.0) & (rf > 0.0)
        safe = np.where(rf > 0.0, rf, 1.0)
        comps.append(np.where(open_face,
                              u_tilde.comp(ax) + dt * K.comp(ax) / safe, 0.0))
    u_star = FaceField(*comps)
    apply_boundary(u_star, grid)
    zero_closed_faces(u_star, wall)

    op = assemble_poisson(rho_new, A, V, dt, grid)
    rhs = projection_rhs(u_star, A, grid)
    warm = state.p if state.p.shape == grid.shape else None
    p, iters, residual = pcg_solve(op, rhs, cfg.pcg, x0=warm)

    u_new = project(u_star, p, rho_new, A, dt, grid)
    zero_closed_faces(u_new, wall)
    apply_boundary(u_new, grid)

    if not (u_new.allfinite() and np.isfinite(f_new).all() and np.isfinite(p).all()):
        raise SolverError(
            f"non-finite field detected at step {state.step_count + 1}, "
            f"t={state.t + dt:.6g}")
    if cfg.check_divergence:
        div_max = float(np.max(np.abs(face_divergence(u_new, A, grid)[V > 0])))
        scale = float(np.linalg.norm(op.prepare_rhs(rhs)))
        if div_max > 10.0 * cfg.pcg.tol * max(scale, 1e-300):
            raise SolverError(
                f"divergence residual {div_max:.3e} above tolerance at "
                f"step {state.step_count + 1}")

    return replace(state, u=u_new, f=f_new, p=p, t=state.t + dt,
                   step_count=state.step_count + 1, last_pcg_iters=iters,
                   last_residual=residual,
                   cum_clamp_mass=state.cum_clamp_mass + clamp)


def sample_row(state: SimState, angle: bool = True) -> dict:
    """One diagnostics record (the time-series row contents)."""
    grid = state.grid
    rho = state.rho()
    s0, s1, s2 = state.params.sigma0, *state.params.sigma_proper
    phases = state.phases()
    try:
        theta = diagnostics.measure_contact_angle(phases.colors[1], state.wall, grid) \
            if angle and state.wall.has_wall else float("nan")
    except diagnostics.NoJunctionError:
        theta = float("nan")
    try:
        thick = diagnostics.interface_thickness(state.f, grid)
    except ValueError:
        thick = float("nan")
    return {
        "t": state.t,
        "kinetic_energy": diagnostics.kinetic_energy(rho, state.u, grid),
        "surface_energy": surface_energy_sym3(
            phases.colors[0], phases.colors[1], phases.colors[2],
            s0, s1, s2, grid),
        "max_divergence": diagnostics.divergence_norm(
            state.u, state.wall.A, grid, V=state.wall.V)[0],
        "contact_angle_deg": theta,
        "interface_thickness": thick,
        "pcg_iterations": state.last_pcg_iters,
        "clamp_mass": state.cum_clamp_mass,
    }


def run(cfg: RunConfig, state: SimState, on_sample=None,
        stop_when=None) -> tuple[SimState, list[dict]]:
    """March to the end time, sampling diagnostics at the configured cadence.

    on_sample(state, row) fires at every sample; stop_when(state, rows) may
    end the run early (used by steady-state benchmarks).  Returns the final
    state and the list of rows.
    """
    rows = [sample_row(state)]
    if on_sample:
        on_sample(state, rows[-1])
    next_sample = state.t + cfg.cadence
    eps = 1e-12
    check_dt = cfg.dt != "auto"
    while state.t < cfg.end_time - eps:
        if cfg.max_steps is not None and state.step_count >= cfg.max_steps:
            break
        if check_dt:
            dt = cfg.resolved_dt(state)
            limit = stable_dt(state)
            if dt > limit and cfg.log_stream is not None:
                print(f"warning: dt={dt:g} exceeds stability estimate {limit:g}",
                      file=cfg.log_stream)
            check_dt = False
        state = step(state, cfg)
        if state.t >= next_sample - eps or state.t >= cfg.end_time - eps:
            rows.append(sample_row(state))
            if on_sample:
                on_sample(state, rows[-1])
            next_sample += cfg.cadence
            check_dt = cfg.dt != "auto"  # warn once per sample window
            if cfg.log_stream is not None:
                r = rows[-1]
                print(f"t={r['t']:.4g} KE={r['kinetic_energy']:.4g} "
                      f"SE={r['surface_energy']:.6g} div={r['max_divergence']:.2e} "
                      f"pcg={r['pcg_iterations']}", file=cfg.log_stream)
            if stop_when is not None and stop_when(state, rows):
                break
    return state, rows
