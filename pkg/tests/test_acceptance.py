"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL
line.  Physics benchmarks run at half resolution (0.25 um cells) and are the
slow part of the suite; run with `pytest tests/test_acceptance.py -v -s`.
"""

import math

import numpy as np
import pytest

from capflow import benchmarks
from capflow.capillary import (CapillaryParams, capillary_force_multi,
                               capillary_stress_two, curvature,
                               interface_normal)
from capflow.config import build_initial_state
from capflow.diagnostics import interface_positions, laplace_residual
from capflow.forces import strain_rate
from capflow.lattice import (BoundarySpec, build_grid, cell_gradient,
                             ones_faces, sync_periodic_faces,
                             tensor_divergence, zeros_faces)
from capflow.phase import (Box, Cylinder, HalfSpace, PhaseSet, Sphere, Union,
                           init_color_from_shape, no_wall, pair_sigma_matrix,
                           partition_residual, wall_fractions)
from capflow.pressure import PcgConfig, assemble_poisson, pcg_solve
from capflow.solver import (PhysParams, RunConfig, initial_state, run,
                            stable_dt, step)

PARAMS = CapillaryParams()


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[ACCEPTANCE] {criterion}: {'PASS' if ok else 'FAIL'} — {detail}")


def steady_angle_run(angle_deg: int, eta: float = 0.4, max_time: float = 40.0):
    """Half-resolution wetting run to a steady measured angle."""
    cfg = benchmarks.contact_angle_config(angle_deg=angle_deg, resolution=0.5,
                                          end_time=max_time)
    cfg.phys.eta = (eta, eta)
    cfg.dt = "auto"
    state = build_initial_state(cfg)
    rc = cfg.run_config()
    rc.cadence = 1.5
    rc.check_divergence = True  # criterion 5 rides along on every step

    def steady(st, rows):
        if st.t < 10.0 or len(rows) < 6:
            return False
        angles = [r["contact_angle_deg"] for r in rows[-5:]]
        if any(math.isnan(a) for a in angles):
            return False
        return float(np.std(angles)) < 1.0

    final, rows = run(rc, state, stop_when=steady)
    angles = [r["contact_angle_deg"] for r in rows[-4:]]
    return float(np.mean(angles)), final, rows


class TestCriterion1ContactAngleSweep:
    @pytest.mark.parametrize("angle", [30, 45, 60, 90, 120])
    def test_contact_angle(self, angle):
        measured, final, rows = steady_angle_run(angle)
        ok = abs(measured - angle) <= 7.0
        report(f"criterion 1 (contact angle {angle} deg)", ok,
               f"measured {measured:.2f} deg after {final.step_count} steps "
               f"(t = {final.t:.1f} us)")
        assert ok, f"designed {angle}, measured {measured:.2f}"


class TestCriterion2Meniscus:
    def test_meniscus_relaxation(self):
        cfg = benchmarks.meniscus_config(resolution=0.5, end_time=40.0)
        cfg.dt = "auto"
        state = build_initial_state(cfg)
        rc = cfg.run_config()
        rc.cadence = 0.5
        rc.check_divergence = True
        grid = state.grid
        mid_x = grid.nx // 2
        heights = []

        def on_sample(st, row):
            h = interface_positions(st.f, grid, axis=2)
            heights.append(float(np.nanmean(h[mid_x, :])))

        final, rows = run(rc, state, on_sample=on_sample)
        h = np.asarray(heights)
        h_final = float(np.mean(h[-8:]))
        dev = h - h_final
        # (a) overshoot: the center height crosses its final value
        crossings = np.count_nonzero(np.diff(np.sign(dev[np.abs(dev) > 1e-6])))
        # (b) oscillation envelope decays: split into thirds, peak deviation
        third = len(dev) // 3
        peaks = [np.max(np.abs(dev[i * third:(i + 1) * third]))
                 for i in range(3)]
        envelope_ok = peaks[2] <= 0.5 * peaks[0] + 1e-12
        # (c) final angle
        angles = [r["contact_angle_deg"] for r in rows if
                  not math.isnan(r["contact_angle_deg"])]
        final_angle = float(np.mean(angles[-6:]))
        angle_ok = abs(final_angle - 30.0) <= 7.0
        ok = crossings >= 2 and envelope_ok and angle_ok
        report("criterion 2 (meniscus relaxation)", ok,
               f"center-height crossings {crossings}, peak deviations "
               f"{peaks[0]:.3f}/{peaks[1]:.3f}/{peaks[2]:.3f} um, final angle "
               f"{final_angle:.2f} deg")
        assert crossings >= 2, "no overshoot of the interface height"
        assert envelope_ok, f"oscillation envelope did not decay: {peaks}"
        assert angle_ok, f"final angle {final_angle:.2f} not within 30 +/- 7"


class TestCriterion3LaplaceLaw:
    def test_static_droplet(self):
        a = 0.125
        n = 64
        g = build_grid((n, 2, n), a)
        R = 16 * a
        c = n * a / 2
        wall = no_wall(g)
        f = init_color_from_shape(Cylinder(axis=1, center=(c, c), radius=R),
                                  g, 2 * a)
        sigma = 1.0
        params = PhysParams(rho=(1.0, 1.0), eta=(1.0, 1.0),
                            sigma_proper=(0.5 * sigma, 0.5 * sigma))
        st = initial_state(g, f, wall, params, eps12=2 * a)
        # explicit viscous limit 0.25 rho a^2 / eta ~ 0.0039 us at eta = 1
        cfg = RunConfig(dt=0.002, end_time=50.0, cadence=10.0)
        for _ in range(10_000):
            st = step(st, cfg)
        # pressure jump across the band versus sigma / R
        i, j, k = np.meshgrid(np.arange(n), np.arange(2), np.arange(n),
                              indexing="ij")
        r = np.sqrt(((i + 0.5) * a - c) ** 2 + ((k + 0.5) * a - c) ** 2)
        inside = r < R - 4 * a
        outside = r > R + 4 * a
        dp = float(np.mean(st.p[inside]) - np.mean(st.p[outside]))
        dp_exact = sigma / R
        dp_ok = abs(dp - dp_exact) <= 0.15 * dp_exact
        # parasitic currents
        u_max = st.u.max_abs()
        u_bound = 1e-2 * math.sqrt(sigma / (1.0 * a))
        u_ok = u_max < u_bound
        report("criterion 3 (static Laplace law)", dp_ok and u_ok,
               f"dp = {dp:.5f} vs sigma/R = {dp_exact:.5f} "
               f"({100 * abs(dp / dp_exact - 1):.1f}%), max|u| = {u_max:.5f} "
               f"vs bound {u_bound:.5f}")
        assert dp_ok, f"pressure jump {dp} vs {dp_exact}"
        assert u_ok, f"parasitic currents {u_max} above {u_bound}"


class TestCriterion5DivergenceContract:
    def test_projection_residual_over_benchmark_run(self):
        # every step asserts max |div(A u)| <= 10 * tol * ||rhs|| internally
        # (check_divergence); here a wetting benchmark runs under the check
        # and the time series is reported
        cfg = benchmarks.contact_angle_config(angle_deg=90, resolution=0.25,
                                              end_time=1.0)
        cfg.dt = "auto"
        state = build_initial_state(cfg)
        rc = cfg.run_config()
        rc.cadence = 0.2
        rc.check_divergence = True
        final, rows = run(rc, state)
        worst = max(r["max_divergence"] for r in rows)
        ok = final.step_count > 0
        report("criterion 5 (divergence-free contract)", ok,
               f"{final.step_count} steps under the per-step check, worst "
               f"sampled residual {worst:.2e} 1/us")
        assert ok
        # criteria 1 and 2 also run with the same per-step check enabled


class TestCriterion4Curvature:
    @pytest.mark.parametrize("r_cells", [8, 16, 32])
    def test_sphere(self, r_cells):
        a = 0.125
        n = max(3 * r_cells, 24)
        g = build_grid((n, n, n), a)
        R = r_cells * a
        c = n * a / 2
        xi = init_color_from_shape(Sphere(center=(c, c, c), radius=R), g, 3 * a)
        kap = curvature(xi, g, PARAMS)
        _, mag, _ = interface_normal(xi, g, PARAMS)
        sel = mag > 0.9 * mag.max()
        got = float(np.mean(kap[sel]))
        ok = abs(got * R / 2.0 - 1.0) < 0.05
        report(f"criterion 4 (sphere curvature R = {r_cells}a)", ok,
               f"kappa R/2 = {got * R / 2:.4f}")
        assert ok

    @pytest.mark.parametrize("r_cells", [8, 16, 32])
    def test_cylinder(self, r_cells):
        a = 0.125
        n = max(3 * r_cells, 24)
        g = build_grid((n, 4, n), a)
        R = r_cells * a
        c = n * a / 2
        xi = init_color_from_shape(Cylinder(axis=1, center=(c, c), radius=R),
                                   g, 3 * a)
        kap = curvature(xi, g, PARAMS)
        _, mag, _ = interface_normal(xi, g, PARAMS)
        sel = mag > 0.9 * mag.max()
        got = float(np.mean(kap[sel]))
        ok = abs(got * R - 1.0) < 0.05
        report(f"criterion 4 (cylinder curvature R = {r_cells}a)", ok,
               f"kappa R = {got * R:.4f}")
        assert ok


class TestCriterion6Conservation:
    def test_fraction_mass_and_partition(self):
        from capflow.solver import step

        a = 0.25
        g = build_grid((4, 4, 24), a, bcs=("periodic", "periodic", "symmetry"))
        wall = no_wall(g)
        f = init_color_from_shape(
            HalfSpace(normal=(0.3, 0, 1.0), point=(0, 0, 3.0)), g, 2 * a)
        st = initial_state(g, f, wall, PhysParams(sigma_proper=(1.0, 2.0)),
                           eps12=2 * a)
        cfg = RunConfig(dt=0.004, end_time=1.0)
        V, vol = wall.V, g.cell_volume
        mass_drift = 0.0
        part_resid = 0.0
        prev = np.sum(st.f * V) * vol
        for _ in range(200):
            clamp_before = st.cum_clamp_mass
            st = step(st, cfg)
            now = np.sum(st.f * V) * vol
            step_clamp = st.cum_clamp_mass - clamp_before
            mass_drift = max(mass_drift,
                             abs(now - prev) - step_clamp - 1e-300)
            prev = now
            part_resid = max(part_resid, partition_residual(st.phases()))
        mass_ok = mass_drift <= 1e-12 * prev
        part_ok = part_resid <= 1e-12
        report("criterion 6 (conservation: mass + partition)",
               mass_ok and part_ok,
               f"per-step mass drift <= {mass_drift:.2e} um^3, partition "
               f"residual {part_resid:.2e}")
        assert mass_ok and part_ok

    def test_capillary_force_noether_sum(self):
        a = 0.125
        g = build_grid((48, 48, 48), a)
        xi = init_color_from_shape(Sphere(center=(3, 3, 3), radius=16 * a),
                                   g, 2 * a)
        tau = capillary_stress_two(xi, 4.0, g, PARAMS)
        div = tensor_divergence(tau, g)
        worst = 0.0
        for ax in range(3):
            sl = [slice(None)] * 3
            sl[ax] = slice(0, g.shape[ax])
            unique = div.comp(ax)[tuple(sl)]
            worst = max(worst, abs(float(np.sum(unique)))
                        / max(float(np.sum(np.abs(unique))), 1e-300))
        ok = worst <= 1e-8
        report("criterion 6 (closed-interface force sum)", ok,
               f"relative momentum defect {worst:.2e}")
        assert ok


class TestCriterion7OracleEquivalences:
    def test_pcg_vs_dense(self):
        rng = np.random.default_rng(77)
        g = build_grid((8, 8, 8), 0.25,
                       bcs=("periodic", "symmetry",
                            ("symmetry", BoundarySpec("fixed_pressure", 100.0))))
        rho = 0.5 + rng.random(g.shape)
        op = assemble_poisson(rho, ones_faces(g), np.ones(g.shape), 0.01, g)
        rhs = rng.standard_normal(g.shape)
        ref = np.linalg.solve(op.to_dense(),
                              np.ravel(op.prepare_rhs(rhs), order="F"))
        p, _, _ = pcg_solve(op, rhs, PcgConfig(tol=1e-11))
        err = float(np.max(np.abs(np.ravel(p, order="F") - ref)))
        ok = err < 1e-8 * max(1.0, float(np.max(np.abs(ref))))
        report("criterion 7 (PCG vs dense solve)", ok, f"max diff {err:.2e}")
        assert ok

    def test_pairwise_force_vs_stress_divergence(self):
        a = 0.125
        g = build_grid((32, 32, 32), a)
        xi = init_color_from_shape(Sphere(center=(2, 2, 2), radius=10 * a),
                                   g, 2 * a)
        s12 = 7.5
        phases = PhaseSet(colors=[np.zeros(g.shape), xi, 1.0 - xi],
                          densities=[0, 1, 1], viscosities=[0, .1, .1],
                          sigma=pair_sigma_matrix(0.0, 0.4 * s12, 0.6 * s12))
        F = capillary_force_multi(phases, g, PARAMS)
        div = tensor_divergence(capillary_stress_two(xi, s12, g, PARAMS), g)
        scale = max(float(np.max(np.abs(div.comp(ax)))) for ax in range(3))
        worst = max(float(np.max(np.abs(F.comp(ax) + div.comp(ax))))
                    for ax in range(3))
        ok = worst <= 1e-10 * scale
        report("criterion 7 (pairwise force vs -div stress)", ok,
               f"max rel diff {worst / scale:.2e}")
        assert ok

    def test_stencil_oracles(self):
        from test_forces import brute_strain
        from test_lattice import brute_gradient

        rng = np.random.default_rng(78)
        g = build_grid((5, 4, 6), 0.5)
        f = rng.standard_normal(g.shape)
        got = cell_gradient(f, g)
        want = brute_gradient(f, 0.5, (True, True, True))
        grad_err = max(float(np.max(np.abs(a - b)))
                       for a, b in zip(got, want))
        u = zeros_faces(g)
        for comp in u.components():
            comp[...] = rng.standard_normal(comp.shape)
        sync_periodic_faces(u, g)
        E = strain_rate(u, g)
        B = brute_strain(u, 0.5)
        strain_err = max(
            float(np.max(np.abs(E.xx - B[..., 0, 0]))),
            float(np.max(np.abs(E.xy - B[..., 0, 1]))),
            float(np.max(np.abs(E.yz - B[..., 1, 2]))))
        ok = grad_err < 1e-12 and strain_err < 1e-12
        report("criterion 7 (stencil oracles)", ok,
               f"gradient {grad_err:.2e}, strain {strain_err:.2e}")
        assert ok


class TestCriterion8EnergyMonotonicity:
    def test_viscous_unforced_decay(self):
        from capflow.capillary import surface_energy_sym3
        from capflow.diagnostics import kinetic_energy
        from capflow.solver import step

        a = 0.25
        g = build_grid((4, 4, 32), a, bcs=("periodic", "periodic", "symmetry"))
        wall = no_wall(g)
        f = init_color_from_shape(
            HalfSpace(normal=(0.25, 0, 1.0), point=(0, 0, 4.0)), g, 2 * a)
        params = PhysParams(rho=(1.0, 1.0), eta=(0.3, 0.3),
                            sigma_proper=(0.75, 0.75))
        st = initial_state(g, f, wall, params, eps12=2 * a)
        cfg = RunConfig(dt=0.004, end_time=10.0)
        s0, s1, s2 = params.sigma0, *params.sigma_proper

        def energy(state):
            ph = state.phases()
            return (kinetic_energy(state.rho(), state.u, g)
                    + surface_energy_sym3(ph.colors[0], ph.colors[1],
                                          ph.colors[2], s0, s1, s2, g))

        vals = [energy(st)]
        for _ in range(8):
            for _ in range(100):
                st = step(st, cfg)
            vals.append(energy(st))
        ok = all(b <= a_ * 1.01 for a_, b in zip(vals, vals[1:]))
        report("criterion 8 (energy monotonicity)", ok,
               "KE+SE per 100-step window: "
               + " ".join(f"{v:.5f}" for v in vals))
        assert ok


def random_shape(rng, L):
    kind = rng.integers(0, 4)
    if kind == 0:
        c = rng.uniform(0.2 * L, 0.8 * L, 3)
        return Sphere(center=tuple(c), radius=rng.uniform(0.15 * L, 0.3 * L))
    if kind == 1:
        lo = rng.uniform(0.1 * L, 0.4 * L, 3)
        hi = lo + rng.uniform(0.2 * L, 0.5 * L, 3)
        return Box(lo=tuple(lo), hi=tuple(hi))
    if kind == 2:
        ax = int(rng.integers(0, 3))
        return Cylinder(axis=ax, center=tuple(rng.uniform(0.3 * L, 0.7 * L, 2)),
                        radius=rng.uniform(0.15 * L, 0.3 * L))
    n = rng.standard_normal(3)
    return HalfSpace(normal=tuple(n / np.linalg.norm(n)),
                     point=tuple(rng.uniform(0.3 * L, 0.7 * L, 3)))


class TestCriterion9StabilityFuzz:
    def test_twenty_random_configs(self):
        failures = []
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            a = float(rng.uniform(0.1, 0.5))
            n = 16
            L = n * a
            g = build_grid((n, n, n), a)
            shape = random_shape(rng, L)
            if rng.random() < 0.5:
                shape = Union([shape, random_shape(rng, L)])
            f = init_color_from_shape(shape, g, float(rng.uniform(1, 2)) * a)
            rho1 = float(rng.uniform(0.001, 1.0))
            ratio = float(10 ** rng.uniform(0, 3))
            s1 = float(rng.uniform(0.05, 25.0))
            s2 = float(rng.uniform(0.05, 25.0))
            params = PhysParams(rho=(rho1, rho1 * ratio),
                                eta=(float(rng.uniform(0.01, 1.0)),) * 2,
                                sigma_proper=(s1, s2))
            st = initial_state(g, f, no_wall(g), params, eps12=1.5 * a)
            cfg = RunConfig(dt="auto", end_time=1e9, cadence=1e9,
                            max_steps=1000, auto_dt_safety=0.4)
            try:
                final, _ = run(cfg, st)
            except Exception as exc:  # noqa: BLE001 - every abort is a failure
                failures.append(f"seed {seed}: {type(exc).__name__} {exc}")
                continue
            u_bound = 2.0 * math.sqrt(
                max(s1 + s2, s1, s2) / (min(params.rho) * a))
            if final.step_count < 1000:
                failures.append(f"seed {seed}: stopped at {final.step_count}")
            elif not final.u.allfinite():
                failures.append(f"seed {seed}: non-finite velocity")
            elif final.u.max_abs() > u_bound:
                failures.append(
                    f"seed {seed}: max|u| {final.u.max_abs():.3f} > {u_bound:.3f}")
        ok = not failures
        report("criterion 9 (stability fuzz, 20 configs x 1000 steps)", ok,
               "all bounded" if ok else "; ".join(failures))
        assert ok, failures
