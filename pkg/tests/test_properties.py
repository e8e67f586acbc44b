"""Property-based checks of the algebraic invariants."""

import numpy as np
from hypothesis import given, settings, strategies as st

from capflow.lattice import build_grid, cell_gradient, ones_faces, \
    sync_periodic_faces, zeros_faces
from capflow.phase import proper_sigma
from capflow.transport import advect_fraction

finite = st.floats(min_value=0.0, max_value=100.0, allow_nan=False)


@given(finite, finite, finite)
def test_proper_sigma_round_trip(s01, s02, s12):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s0, s1, s2 = proper_sigma(s01, s02, s12)
    assert abs((s0 + s1) - s01) <= 1e-9 * max(1.0, s01)
    assert abs((s0 + s2) - s02) <= 1e-9 * max(1.0, s02)
    assert abs((s1 + s2) - s12) <= 1e-9 * max(1.0, s12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1),
       st.floats(min_value=-3.0, max_value=3.0, allow_nan=False),
       st.floats(min_value=-3.0, max_value=3.0, allow_nan=False))
def test_gradient_linearity(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    g = build_grid((5, 4, 6), 0.5, bcs=("periodic", "symmetry", "periodic"))
    f1 = rng.standard_normal(g.shape)
    f2 = rng.standard_normal(g.shape)
    combo = cell_gradient(alpha * f1 + beta * f2, g)
    parts = [alpha * a + beta * b
             for a, b in zip(cell_gradient(f1, g), cell_gradient(f2, g))]
    for a, b in zip(combo, parts):
        assert np.max(np.abs(a - b)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_fraction_advection_conserves_and_bounds(seed):
    rng = np.random.default_rng(seed)
    g = build_grid((6, 6, 6), 0.5)
    f = rng.random(g.shape)
    u = zeros_faces(g)
    for c in u.components():
        c[...] = 0.2 * rng.standard_normal(c.shape)
    sync_periodic_faces(u, g)
    A = ones_faces(g)
    V = np.ones(g.shape)
    before = np.sum(f * V) * g.cell_volume
    f2, clamp = advect_fraction(f, u, A, V, 0.2, g)
    after = np.sum(f2 * V) * g.cell_volume
    assert np.all(f2 >= 0.0) and np.all(f2 <= 1.0)
    assert abs(before - after) <= clamp + 1e-12 * before
