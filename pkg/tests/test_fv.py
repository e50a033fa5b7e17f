import numpy as np
import pytest

from mlswe.equations import EquationSpec, LayerState
from mlswe.fv import FieldFV, Grid1D, SolverError, max_stable_dt_fv, rhs_fv, wall_boundary

import helpers

S1 = EquationSpec(M=1, g=1.0, rho=(1.0,))


def lake_at_rest_field(grid, surfaces, b, M):
    """Nodal lake-at-rest initializer: fill layers bottom-up against b."""
    K = grid.K
    u = np.zeros((K, M, 2))
    s = b.copy()
    for m in range(M - 1, -1, -1):
        hm = np.maximum(surfaces[m] - s, 0.0)
        u[:, m, 0] = hm
        s = s + hm
    return FieldFV(u=u, b=b.copy())


def test_grid_validation():
    with pytest.raises(SolverError):
        Grid1D(K=1, dx=0.1)
    with pytest.raises(SolverError):
        Grid1D(K=10, dx=0.0)
    with pytest.raises(SolverError):
        Grid1D(K=10, dx=0.1, bc="open")


def test_wall_boundary_mirror():
    u = LayerState(h=np.array([1.0]), hv=np.array([2.0]), b=np.array(0.3))
    g = wall_boundary(u)
    assert g.h[0] == 1.0 and g.hv[0] == -2.0 and g.b == pytest.approx(0.3)


def test_wall_boundary_2d_reflects_normal_only():
    u = LayerState(
        h=np.array([1.0]), hv=np.array([2.0]), b=np.array(0.0), hw=np.array([3.0])
    )
    g = wall_boundary(u, n=np.array([1.0, 0.0]))
    assert g.hv[0] == -2.0 and g.hw[0] == 3.0
    g = wall_boundary(u, n=np.array([0.0, 1.0]))
    assert g.hv[0] == 2.0 and g.hw[0] == -3.0


@pytest.mark.parametrize("bc", ["periodic", "wall"])
def test_lake_at_rest_smooth_bottom(bc):
    grid = Grid1D(K=64, dx=1.0 / 64.0, bc=bc)
    x = grid.cell_centers
    b = 0.3 + 0.2 * np.sin(2.0 * np.pi * x)
    spec = EquationSpec(M=3, g=9.81, rho=(0.9, 1.0, 1.1))
    field = lake_at_rest_field(grid, [2.0, 1.5, 1.0], b, 3)
    r = rhs_fv(field, spec, grid)
    assert np.max(np.abs(r)) <= 1e-13


@pytest.mark.parametrize("bc", ["periodic", "wall"])
def test_lake_at_rest_discontinuous_bottom_with_dry_cells(bc):
    # islands poke through the surface and some layers vanish; the face
    # assembled from surface terms alone must still be in balance
    rng = np.random.default_rng(3)
    grid = Grid1D(K=40, dx=0.5, bc=bc)
    b = rng.uniform(0.0, 2.0, size=40)
    b[10:14] = 2.6  # above every surface: fully dry cells
    spec = EquationSpec(M=2, g=9.81, rho=(1.0, 3.0))
    field = lake_at_rest_field(grid, [1.0, 0.6], b, 2)
    r = rhs_fv(field, spec, grid)
    assert np.max(np.abs(r)) <= 1e-13


def test_free_stream_constant_state_flat_bottom():
    grid = Grid1D(K=32, dx=0.25, bc="periodic")
    b = np.full(32, 0.7)
    u = np.zeros((32, 2, 2))
    u[:, :, 0] = [1.2, 0.8]
    u[:, :, 1] = [0.6, -0.4]
    spec = EquationSpec(M=2, g=2.0, rho=(1.0, 2.0))
    r = rhs_fv(FieldFV(u=u, b=b), spec, grid)
    assert np.max(np.abs(r)) <= 1e-14


def test_mass_conservation_periodic():
    rng = np.random.default_rng(9)
    grid = Grid1D(K=50, dx=0.1, bc="periodic")
    spec = helpers.random_spec(3, g=1.2)
    for _ in range(20):
        h = 10.0 ** rng.uniform(-6.0, 0.5, size=(50, 3))
        h[rng.random((50, 3)) < 0.2] = 0.0
        v = rng.uniform(-3.0, 3.0, size=(50, 3))
        b = rng.uniform(0.0, 1.5, size=50)
        u = np.stack([h, h * v], axis=-1)
        r = rhs_fv(FieldFV(u=u, b=b), spec, grid)
        dm = np.sum(r[:, :, 0], axis=0)
        assert np.max(np.abs(dm)) <= 1e-12 * (1.0 + np.max(np.abs(r)))


def test_mass_conservation_walls():
    rng = np.random.default_rng(10)
    grid = Grid1D(K=30, dx=0.2, bc="wall")
    spec = helpers.random_spec(2, g=9.81)
    h = 10.0 ** rng.uniform(-4.0, 0.5, size=(30, 2))
    v = rng.uniform(-3.0, 3.0, size=(30, 2))
    b = rng.uniform(0.0, 1.0, size=30)
    u = np.stack([h, h * v], axis=-1)
    r = rhs_fv(FieldFV(u=u, b=b), spec, grid)
    dm = np.sum(r[:, :, 0], axis=0)
    assert np.max(np.abs(dm)) <= 1e-12 * (1.0 + np.max(np.abs(r)))


def test_dt_bound_value():
    grid = Grid1D(K=10, dx=0.1, bc="periodic")
    u = np.zeros((10, 1, 2))
    u[:, :, 0] = 1.0
    dt = max_stable_dt_fv(FieldFV(u=u, b=np.zeros(10)), S1, grid, cfl=1.0)
    assert dt == pytest.approx(0.05)


def test_dt_dry_field_caps():
    grid = Grid1D(K=10, dx=0.1)
    u = np.zeros((10, 1, 2))
    dt = max_stable_dt_fv(FieldFV(u=u, b=np.zeros(10)), S1, grid, cfl=1.0, dt_max=2.5)
    assert dt == 2.5


def test_forward_euler_positivity_small_fuzz():
    # fields stepped once at the positivity time step stay nonnegative
    rng = np.random.default_rng(21)
    grid = Grid1D(K=25, dx=0.04, bc="periodic")
    spec = helpers.random_spec(2, g=9.81)
    worst = 0.0
    for _ in range(300):
        h = 10.0 ** rng.uniform(-8.0, 0.5, size=(25, 2))
        h[rng.random((25, 2)) < 0.3] = 0.0
        v = rng.uniform(-5.0, 5.0, size=(25, 2))
        b = rng.uniform(0.0, 2.0, size=25)
        u = np.stack([h, h * v], axis=-1)
        field = FieldFV(u=u, b=b)
        dt = max_stable_dt_fv(field, spec, grid, cfl=1.0)
        unew = u + dt * rhs_fv(field, spec, grid)
        worst = min(worst, float(np.min(unew[:, :, 0])))
    assert worst >= 0.0


def test_dam_break_runs_and_conserves_mass():
    grid = Grid1D(K=100, dx=0.1, bc="wall")
    spec = EquationSpec(M=1, g=9.81, rho=(1.0,))
    u = np.zeros((100, 1, 2))
    u[:50, 0, 0] = 1.0
    u[50:, 0, 0] = 0.1
    field = FieldFV(u=u, b=np.zeros(100))
    mass0 = np.sum(field.u[:, :, 0])
    for _ in range(200):
        dt = max_stable_dt_fv(field, spec, grid, cfl=0.9)
        field.u = field.u + dt * rhs_fv(field, spec, grid)
    assert np.all(field.u[:, :, 0] >= 0.0)
    assert np.sum(field.u[:, :, 0]) == pytest.approx(mass0, rel=1e-12)
    # front moved right: downstream depth increased somewhere
    assert np.max(field.u[60:, 0, 0]) > 0.12
