import numpy as np
import pytest

from adlbm.flow import macroscopic, ns_equilibrium, run_flow_to_steady
from adlbm.lattice import Grid, NodeTag, build_lattice

D2Q9 = build_lattice("D2Q9")


class TestNSEquilibrium:
    def test_rest_state_is_weights(self):
        f_eq = ns_equilibrium(1.0, np.zeros(2), D2Q9, 1 / 3)
        assert np.allclose(f_eq, D2Q9.weights, atol=1e-15)

    def test_moments_recovered(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            rho = rng.uniform(0.5, 2.0)
            v = rng.uniform(-0.2, 0.2, size=2)
            f_eq = ns_equilibrium(rho, v, D2Q9, 1 / 3)
            assert f_eq.sum() == pytest.approx(rho, rel=1e-13)
            mom = f_eq @ D2Q9.velocities.astype(float)
            assert np.allclose(mom, rho * v, rtol=1e-13, atol=1e-14)

    def test_axis_flux_example(self):
        f_eq = ns_equilibrium(1.0, np.array([0.1, 0.0]), D2Q9, 1 / 3)
        assert (f_eq * D2Q9.velocities[:, 0]).sum() == pytest.approx(0.1, rel=1e-13)


def _channel(nx, ny, dx, dt):
    """Straight channel: solid wall rows, inlet column, outlet column."""
    tags = np.full((nx, ny), NodeTag.INTERIOR, dtype=np.int8)
    tags[:, 0] = tags[:, -1] = NodeTag.SOLID
    grid = Grid(dims=(nx, ny), dx=dx, dt=dt, tags=tags)
    inlet = np.zeros((nx, ny), dtype=bool)
    inlet[0, 1:-1] = True
    outlet = np.zeros((nx, ny), dtype=bool)
    outlet[-1, 1:-1] = True
    return grid, inlet, outlet


def test_zero_inlet_velocity_stays_at_rest():
    grid, inlet, outlet = _channel(12, 9, 0.1, 0.01)
    state = run_flow_to_steady(grid, mu=0.05, rho0=1.0,
                               inlet_velocity=[0.0, 0.0], inlet_mask=inlet,
                               outlet_mask=outlet, tol=1e-10, max_steps=2000)
    assert np.abs(state.v).max() <= 1e-12


def test_all_solid_interior_rejected():
    grid, inlet, outlet = _channel(12, 9, 0.1, 0.01)
    grid.tags[6, :] = NodeTag.SOLID   # wall across the channel
    with pytest.raises(ValueError, match="no fluid path"):
        run_flow_to_steady(grid, mu=0.05, rho0=1.0, inlet_velocity=[0.1, 0.0],
                           inlet_mask=inlet, outlet_mask=outlet)


def test_no_fluid_nodes_rejected():
    tags = np.full((4, 4), NodeTag.SOLID, dtype=np.int8)
    grid = Grid(dims=(4, 4), dx=0.1, dt=0.01, tags=tags)
    with pytest.raises(ValueError, match="no fluid nodes"):
        run_flow_to_steady(grid, mu=0.05, rho0=1.0, inlet_velocity=[0.1, 0.0],
                           inlet_mask=np.ones((4, 4), dtype=bool),
                           outlet_mask=np.ones((4, 4), dtype=bool))


@pytest.fixture(scope="module")
def channel_steady_state():
    # long shallow channel, Re ~ 1: the profile develops to parabolic
    nx, ny = 121, 17
    dx = 0.01
    dt = 2e-3
    grid, inlet, outlet = _channel(nx, ny, dx, dt)
    state = run_flow_to_steady(grid, mu=0.02, rho0=1.0,
                               inlet_velocity=[0.05, 0.0], inlet_mask=inlet,
                               outlet_mask=outlet, tol=5e-7, max_steps=40000,
                               check_every=200)
    return grid, state


def test_poiseuille_centerline(channel_steady_state):
    grid, state = channel_steady_state
    nx, ny = grid.dims
    i = int(0.8 * nx)
    vx = state.v[i, 1:-1, 0]
    # fully developed Poiseuille: centerline = 1.5 x sectional mean, with
    # the half-way bounce-back wall sitting dx/2 beyond the last fluid node
    y = (np.arange(1, ny - 1) - 0.5) * grid.dx
    height = (ny - 2) * grid.dx
    flow_rate = np.trapezoid(vx, y) + 0.5 * grid.dx * (vx[0] + vx[-1])
    u_mean = flow_rate / height
    centerline = vx.max()
    assert centerline == pytest.approx(1.5 * u_mean, rel=0.03)
    # profile matches the parabola shape away from the entrance
    parabola = 6 * u_mean * (y / height) * (1 - y / height)
    assert np.abs(vx - parabola).max() <= 0.03 * centerline


def test_mass_flux_balance(channel_steady_state):
    grid, state = channel_steady_state
    vx = state.v[:, 1:-1, 0]
    inflow = vx[1].sum()
    outflow = vx[-2].sum()
    assert outflow == pytest.approx(inflow, rel=0.01)


def test_discrete_divergence_small(channel_steady_state):
    grid, state = channel_steady_state
    v = state.v
    dvx = (v[2:, 1:-1, 0] - v[:-2, 1:-1, 0]) / (2 * grid.dx)
    dvy = (v[1:-1, 2:, 1] - v[1:-1, :-2, 1]) / (2 * grid.dx)
    div = dvx + dvy
    interior = div[5:-5, 2:-2]
    speed_scale = np.abs(v).max() / grid.dx
    assert np.sqrt((interior ** 2).mean()) <= 0.02 * speed_scale


def test_stationary_fluid_is_fixed_point():
    grid, inlet, outlet = _channel(10, 8, 0.1, 0.01)
    model = D2Q9
    c_s_sq = grid.c_s_sq(model)
    rho = np.where(grid.nonsolid(), 1.0, 0.0)
    f = ns_equilibrium(rho, np.zeros(grid.dims + (2,)), model, c_s_sq)
    tau = 0.05 / (1.0 * c_s_sq * grid.dt) + 0.5
    f_eq = ns_equilibrium(*macroscopic(f, model, grid.c), model, c_s_sq)
    post = f - (f - f_eq) / tau
    assert np.allclose(post, f, atol=1e-14)
