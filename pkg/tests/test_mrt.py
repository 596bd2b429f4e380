import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adlbm.lattice import Grid, build_lattice
from adlbm.mrt import (HWParams, MomentTransform, collide_mrt,
                       collision_matrix_field, hw_relaxation,
                       moment_relaxation_block, srt_relaxation, yn_relaxation)
from adlbm.scenarios import heterogeneous_tensor, rotated_tensor
from adlbm.transport import (ScalarDiffusion, TensorDiffusion,
                             TransportConfig, TransportSolver, collide_srt,
                             equilibrium, initialize, relaxation_time)

D2Q5 = build_lattice("D2Q5")
D2Q9 = build_lattice("D2Q9")


@pytest.mark.parametrize("model", [D2Q5, D2Q9])
class TestMomentTransform:
    def test_inverse(self, model):
        t = MomentTransform.for_model(model)
        assert np.allclose(t.matrix @ t.inverse, np.eye(model.m), atol=1e-12)

    def test_row_zero_is_concentration(self, model):
        t = MomentTransform.for_model(model)
        rng = np.random.default_rng(1)
        f = rng.random(model.m)
        assert (t.matrix @ f)[0] == pytest.approx(f.sum(), rel=1e-13)

    def test_j_rows_are_velocity_moments(self, model):
        t = MomentTransform.for_model(model)
        e = model.velocities.astype(float)
        for axis, row in enumerate(t.j_rows):
            assert np.array_equal(t.matrix[row], e[:, axis])


class TestCollideMRT:
    def test_diagonal_reduces_to_srt(self):
        rng = np.random.default_rng(2)
        t = MomentTransform.for_model(D2Q9)
        tau = 0.83
        s = srt_relaxation(
            (tau - 0.5) * (1 / 3) * 1.0, 1.0, 1 / 3, D2Q9.m)
        for _ in range(1000):
            f = rng.random(D2Q9.m)
            f_eq = equilibrium(f.sum(), None, D2Q9, 1 / 3)
            g = rng.random()
            a = collide_mrt(f, f_eq, t, s, g, 1.0, D2Q9)
            b = collide_srt(f, f_eq, tau, g, 1.0, D2Q9)
            assert np.allclose(a, b, atol=1e-12)

    def test_identity_relaxation_gives_equilibrium(self):
        from adlbm.mrt import RelaxationMatrix
        t = MomentTransform.for_model(D2Q5)
        s = RelaxationMatrix(matrix=np.eye(5))
        f = np.random.default_rng(3).random(5)
        f_eq = equilibrium(f.sum(), None, D2Q5, 1 / 3)
        out = collide_mrt(f, f_eq, t, s, 0.0, 1.0, D2Q5)
        assert np.allclose(out, f_eq, atol=1e-13)

    @given(st.integers(0, 1000))
    @settings(max_examples=60, deadline=None)
    def test_mass_conserved(self, seed):
        rng = np.random.default_rng(seed)
        d = rotated_tensor(rng.uniform(0.5, 3), rng.uniform(0.01, 0.4),
                           rng.uniform(0, np.pi))
        transform, s = yn_relaxation(d, dt=1e-3, c=100.0)
        f = rng.random(5)
        f_eq = equilibrium(f.sum(), None, D2Q5, (100.0 ** 2) / 3)
        out = collide_mrt(f, f_eq, transform, s, 0.0, 1e-3, D2Q5)
        assert out.sum() == pytest.approx(f.sum(), rel=1e-13)


class TestRelaxationConstruction:
    def test_isotropic_block_reduction(self):
        # tau = 1000.5 setup: D = 1/3, dt = dx = 1e-3
        d = (1 / 3) * np.eye(2)
        _, s = yn_relaxation(d, dt=1e-3, c=1.0)
        tau = relaxation_time(1 / 3, 1e-3, 1 / 3)
        rows = MomentTransform.for_model(D2Q5).j_rows
        for r in rows:
            assert s.matrix[r, r] == pytest.approx(1 / tau, rel=1e-13)
        assert s.matrix[rows[0], rows[1]] == pytest.approx(0.0, abs=1e-16)

    def test_rotated_tensor_entries(self):
        # hand evaluation of R^T diag(10, 1e-3) R at theta = pi/4:
        # diagonal (10 + 1e-3)/2, off-diagonal -(10 - 1e-3)/2 under the
        # counterclockwise active rotation convention
        d = rotated_tensor(10.0, 1e-3, np.pi / 4)
        assert d[0, 0] == pytest.approx(5.0005, abs=1e-12)
        assert d[1, 1] == pytest.approx(5.0005, abs=1e-12)
        assert abs(d[0, 1]) == pytest.approx(4.9995, abs=1e-12)
        assert d[0, 1] == d[1, 0]

    @given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(0, np.pi))
    @settings(max_examples=100, deadline=None)
    def test_block_eigenvalues_in_stability_interval(self, d1, d2, theta):
        d = rotated_tensor(d1, d2, theta)
        block = moment_relaxation_block(d, dt=1e-3, c_s_sq=1e4 / 3)
        eig = np.linalg.eigvalsh(block)
        assert (eig > 0).all() and (eig < 2).all()

    def test_non_spd_rejected(self):
        with pytest.raises(ValueError):
            yn_relaxation(np.array([[1.0, 2.0], [2.0, 1.0]]), dt=1e-3, c=10.0)
        with pytest.raises(ValueError):
            hw_relaxation(np.array([[1.0, 2.0], [2.0, 1.0]]), dt=1e-3, c=10.0)

    def test_hw_params_pinned_to_published_values(self):
        assert HWParams().validate() is not None
        with pytest.raises(ValueError):
            HWParams(c1=2.0).validate()
        with pytest.raises(ValueError):
            HWParams(rates=(1.0,) * 8 + (1.2,)).validate()

    def test_hw_equilibrium_rule_moments(self):
        transform, s, eq_rule = hw_relaxation(np.eye(2) * 0.3, dt=1e-3, c=100.0)
        u, v = 2.0, np.array([1.0, -2.0])
        m_eq = eq_rule(u, v)
        assert m_eq[..., 0] == pytest.approx(u, rel=1e-13)
        # j rows carry u v / c
        assert m_eq[..., 3] == pytest.approx(u * v[0] / 100.0, rel=1e-12)
        assert m_eq[..., 5] == pytest.approx(u * v[1] / 100.0, rel=1e-12)


class TestHeterogeneousTensorValues:
    def test_at_origin(self):
        d = heterogeneous_tensor(np.zeros((1, 2)))[0]
        assert np.allclose(d, 1e-10 * np.eye(2))

    def test_at_unit_corner(self):
        d = heterogeneous_tensor(np.ones((1, 2)))[0]
        assert d[0, 0] == pytest.approx(1e-10 + 1.001)
        assert d[0, 1] == pytest.approx(-0.999)
        assert d[1, 1] == pytest.approx(1e-10 + 1.001)


def _covariance_fit(scheme, model, d_tensor, n=64, n_steps=50):
    dx = 1.0 / n
    dmax = float(np.linalg.eigvalsh(d_tensor).max())
    dt = dx * dx / (3 * dmax) * 0.8
    grid = Grid(dims=(n, n), dx=dx, dt=dt, periodic=True)
    cfg = TransportConfig(grid=grid, model=model,
                          diffusion=TensorDiffusion(d_tensor),
                          end_time=n_steps * dt, scheme=scheme)
    solver = TransportSolver(cfg)
    coords = grid.coordinates()
    x, y = coords[..., 0], coords[..., 1]
    u0 = np.exp(-(((x - 0.5) ** 2) + ((y - 0.5) ** 2)) / (2 * 0.07 ** 2))
    state = solver.initial_state()
    state.field.current[:] = initialize(u0, model).current
    covs, ts = [], []
    for _ in range(n_steps):
        solver.step(state)
        u = state.u
        m0 = u.sum()
        xb, yb = (u * x).sum() / m0, (u * y).sum() / m0
        covs.append([(u * (x - xb) ** 2).sum() / m0,
                     (u * (x - xb) * (y - yb)).sum() / m0,
                     (u * (y - yb) ** 2).sum() / m0])
        ts.append(state.t)
    covs = np.array(covs)
    slopes = [np.polyfit(ts, covs[:, i], 1)[0] / 2 for i in range(3)]
    return np.array([[slopes[0], slopes[1]], [slopes[1], slopes[2]]])


@pytest.mark.parametrize("scheme,model", [("yn", D2Q5), ("hw", D2Q9)])
def test_anisotropic_tensor_recovery(scheme, model):
    # independent oracle: the solution covariance of a diffusing blob
    # grows at rate 2 D per component
    target = rotated_tensor(2e-3, 5e-4, np.pi / 6)
    fitted = _covariance_fit(scheme, model, target)
    assert np.abs(fitted - target).max() <= 0.02 * np.abs(target).max()


def test_rotation_consistency_quarter_turn():
    # simulating the 90-degree-rotated tensor equals rotating the initial
    # data, simulating the original tensor, and rotating back
    d0 = np.diag([2e-3, 5e-4])
    d_rot = rotated_tensor(5e-4, 2e-3, 0.0)  # swap = quarter-turn conjugation
    n, dx = 32, 1 / 32
    dt = dx * dx / (3 * 2e-3) * 0.8
    grid = Grid(dims=(n, n), dx=dx, dt=dt, periodic=True)
    rng = np.random.default_rng(11)
    u0 = rng.random((n, n))

    def run(tensor, u_init):
        cfg = TransportConfig(grid=grid, model=D2Q5,
                              diffusion=TensorDiffusion(tensor),
                              end_time=40 * dt, scheme="yn")
        solver = TransportSolver(cfg)
        state = solver.initial_state()
        state.field.current[:] = initialize(u_init, D2Q5).current
        for _ in range(40):
            solver.step(state)
        return state.u

    u_a = run(np.diag([2e-3, 5e-4]), u0)
    u_b = run(np.diag([5e-4, 2e-3]), np.rot90(u0).copy())
    back = np.rot90(u_b, k=-1)
    rel = np.linalg.norm(u_a - back) / np.linalg.norm(u_a)
    assert rel <= 0.02


def test_scalar_diffusion_dispatch_is_diagonal():
    grid = Grid(dims=(4, 4), dx=0.1, dt=1e-3, periodic=True)
    lam = collision_matrix_field("hw", ScalarDiffusion(0.05), grid, D2Q9)
    tau = relaxation_time(0.05, 1e-3, grid.c_s_sq(D2Q9))
    assert np.allclose(lam, np.eye(9) / tau, atol=1e-13)


def test_homogeneous_tensor_collapses_to_single_matrix():
    grid = Grid(dims=(6, 6), dx=0.1, dt=1e-3, periodic=True)
    lam = collision_matrix_field("yn", TensorDiffusion(rotated_tensor(1.0, 0.1, 0.3)),
                                 grid, D2Q5)
    assert lam.shape == (5, 5)
    lam_h = collision_matrix_field(
        "hw", TensorDiffusion(lambda c: heterogeneous_tensor(c) + np.eye(2)),
        grid, D2Q9)
    assert lam_h.shape == (6, 6, 9, 9)
