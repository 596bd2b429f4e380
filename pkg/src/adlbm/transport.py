"""Single-relaxation-time BGK solver for advection-diffusion.

One time step is collide (all non-solid nodes), stream, then boundary
fill at the new time level.  The multiple-relaxation-time collision for
tensor diffusivities plugs into the same loop through
:mod:`adlbm.mrt`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryPlan, build_plan
from .lattice import DistributionField, Grid, LatticeModel, NodeTag, build_lattice, stream


# ---------------------------------------------------------------------------
# diffusivity specifications


@dataclass(frozen=True)
class ScalarDiffusion:
    """Isotropic diffusion coefficient."""

    d: float

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("diffusivity must be positive")

    def tensor_at(self, coords):
        eye = np.eye(coords.shape[-1])
        return self.d * np.broadcast_to(eye, coords.shape[:-1] + eye.shape).copy()


@dataclass(frozen=True)
class TensorDiffusion:
    """Symmetric positive definite 2x2 tensor, possibly space varying.

    ``field`` is either a (2, 2) array or a callable mapping node
    coordinates (..., 2) to tensors (..., 2, 2).
    """

    field: object

    def tensor_at(self, coords):
        if callable(self.field):
            d = np.asarray(self.field(coords), dtype=float)
        else:
            d = np.asarray(self.field, dtype=float)
            d = np.broadcast_to(d, coords.shape[:-1] + d.shape).copy()
        validate_spd(d)
        return d


def validate_spd(d, sym_tol=1e-12):
    d = np.asarray(d)
    asym = np.abs(d[..., 0, 1] - d[..., 1, 0])
    if (asym > sym_tol).any():
        raise ValueError("diffusion tensor is not symmetric")
    eig = np.linalg.eigvalsh(d)
    if (eig <= 0).any():
        raise ValueError("diffusion tensor is not positive definite")


# ---------------------------------------------------------------------------
# kernel operations


def relaxation_time(diffusivity: float, dt: float, c_s_sq: float) -> float:
    """tau = D/(dt c_s^2) + 1/2."""
    if diffusivity <= 0 or dt <= 0 or c_s_sq <= 0:
        raise ValueError("relaxation time requires positive D, dt, c_s^2")
    return diffusivity / (dt * c_s_sq) + 0.5


def equilibrium(u, v, model: LatticeModel, c_s_sq: float):
    """Linear equilibrium f_i = w_i u (1 + v.e_i / c_s^2).

    ``u`` may be scalar or an array over nodes; ``v`` is None (pure
    diffusion), a single vector, or a per-node vector array.
    """
    u = np.asarray(u, dtype=float)
    w = model.weights
    if v is None:
        return u[..., None] * w
    v = np.asarray(v, dtype=float)
    c = np.sqrt(c_s_sq / model.c_s_sq_factor)
    e_phys = model.velocities * c            # (m, ndim)
    v_dot_e = v @ e_phys.T                   # (..., m)
    return w * u[..., None] * (1.0 + v_dot_e / c_s_sq)


def collide_srt(f, f_eq, tau: float, g, dt: float, model: LatticeModel):
    """BGK collision with source: fhat = f - (f - f_eq)/tau + w dt g.

    The expression is kept in exactly this form: for tau >= 1 and
    non-negative f, f_eq, g it cannot produce negative entries even in
    floating point, which the critical-time-step guarantee relies on.
    """
    if tau <= 0.5:
        raise ValueError("tau must exceed 1/2 (positive diffusivity)")
    g = np.asarray(g, dtype=float)
    return f - (f - f_eq) / tau + model.weights * dt * g[..., None]


def concentration(f):
    """u = sum_i f_i."""
    return np.asarray(f).sum(axis=-1)


def initialize(u0, model: LatticeModel, grid: Grid = None) -> DistributionField:
    """f_i(x, 0) = w_i u0(x); the concentration moment reproduces u0."""
    u0 = np.asarray(u0, dtype=float)
    cur = u0[..., None] * model.weights
    return DistributionField(current=cur, next=np.zeros_like(cur))


# ---------------------------------------------------------------------------
# configuration and the marching loop


@dataclass
class TransportConfig:
    grid: Grid
    model: LatticeModel
    diffusion: object                 # ScalarDiffusion or TensorDiffusion
    end_time: float
    u0: object = 0.0                  # scalar, array, or callable(coords)
    velocity: object = None           # None, vector, array, or callable(coords)
    source: object = None             # None, scalar, array, or callable(coords, t)
    scheme: str = "srt"               # srt | yn | hw
    dirichlet_value: object = None    # callable(coords, t)
    neumann_flux: object = None       # callable(coords, t); None means q = 0
    dirichlet_method: str = "standard"
    outflow_mask: object = None
    n_steps: int = None               # overrides end_time/dt rounding

    def __post_init__(self):
        if isinstance(self.model, str):
            self.model = build_lattice(self.model)
        if self.end_time <= 0:
            raise ValueError("end_time must be positive")
        if self.n_steps is None:
            ratio = self.end_time / self.grid.dt
            n = round(ratio)
            if n < 1 or abs(ratio - n) > 1e-9 * max(ratio, 1.0):
                raise ValueError(
                    f"end_time/dt = {ratio} is not an integer step count; "
                    "pass n_steps explicitly")
            self.n_steps = int(n)
        if self.scheme == "srt" and not isinstance(self.diffusion, ScalarDiffusion):
            raise ValueError("the SRT scheme needs a scalar diffusivity")


@dataclass
class TransportState:
    field: DistributionField
    t: float = 0.0
    step_index: int = 0

    @property
    def u(self):
        return concentration(self.field.current)


@dataclass
class RunResult:
    report: object
    state: TransportState
    u_series: np.ndarray = None


class TransportSolver:
    """Compiled marching loop for one :class:`TransportConfig`."""

    def __init__(self, config: TransportConfig):
        self.config = config
        grid, model = config.grid, config.model
        self.grid, self.model = grid, model
        self.c_s_sq = grid.c_s_sq(model)
        self.coords = grid.coordinates()
        self.nonsolid = grid.nonsolid()
        self._solid = ~self.nonsolid
        self.velocity = self._resolve_velocity(config.velocity)
        self.plan = build_plan(
            grid, model,
            dirichlet_value=config.dirichlet_value,
            neumann_flux=config.neumann_flux,
            dirichlet_method=config.dirichlet_method,
            outflow_mask=config.outflow_mask,
        ) if not grid.periodic else BoundaryPlan(grid=grid, model=model)
        self._setup_collision()
        self._source = self._resolve_source(config.source)

    # -- setup helpers

    def _resolve_velocity(self, v):
        if v is None:
            return None
        if callable(v):
            v = v(self.coords)
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            v = np.broadcast_to(v, self.grid.dims + (self.grid.ndim,)).copy()
        if self._solid.any():
            v = v.copy()
            v[self._solid] = 0.0
        return v

    def _resolve_source(self, g):
        if g is None:
            return None
        if callable(g):
            return g
        g_arr = np.broadcast_to(np.asarray(g, dtype=float), self.grid.dims)
        return lambda coords, t: g_arr

    def _setup_collision(self):
        cfg = self.config
        if cfg.scheme == "srt":
            self.tau = relaxation_time(cfg.diffusion.d, self.grid.dt, self.c_s_sq)
            self.lam = None
            self._equilibrium = lambda u, v: equilibrium(u, v, self.model, self.c_s_sq)
        elif cfg.scheme in ("yn", "hw"):
            from . import mrt
            self.tau = None
            self.lam = mrt.collision_matrix_field(
                cfg.scheme, cfg.diffusion, self.grid, self.model)
            if cfg.scheme == "hw":
                from .flow import ns_equilibrium
                self._equilibrium = lambda u, v: (
                    equilibrium(u, v, self.model, self.c_s_sq) if v is None
                    else ns_equilibrium(u, v, self.model, self.c_s_sq))
            else:
                self._equilibrium = lambda u, v: equilibrium(u, v, self.model, self.c_s_sq)
        else:
            raise ValueError(f"unknown scheme {cfg.scheme!r}")

    # -- public API

    def initial_state(self) -> TransportState:
        u0 = self.config.u0
        if callable(u0):
            u0 = u0(self.coords)
        u0 = np.broadcast_to(np.asarray(u0, dtype=float), self.grid.dims).copy()
        u0[self._solid] = 0.0
        field = initialize(u0, self.model, self.grid)
        return TransportState(field=field)

    def _collide(self, state: TransportState):
        cur = state.field.current
        u = concentration(cur)
        f_eq = self._equilibrium(u, self.velocity)
        if self.lam is None:
            out = cur - (cur - f_eq) / self.tau
        else:
            if self.lam.ndim == 2:
                out = cur - np.einsum("ij,...j->...i", self.lam, cur - f_eq)
            else:
                out = cur - np.einsum("...ij,...j->...i", self.lam, cur - f_eq)
        if self._source is not None:
            g = np.asarray(self._source(self.coords, state.t), dtype=float)
            g = np.broadcast_to(g, self.grid.dims)
            if self._solid.any():
                g = np.where(self._solid, 0.0, g)
            out = out + self.model.weights * (self.grid.dt * g)[..., None]
        if self._solid.any():
            out[self._solid] = 0.0
        cur[...] = out

    def step(self, state: TransportState) -> TransportState:
        """Advance one step: collide, stream, boundary fill, clock."""
        self._collide(state)
        stream(state.field, self.grid, self.model)
        t_new = state.t + self.grid.dt
        self.plan.apply(state.field, t_new)
        state.t = t_new
        state.step_index += 1
        cur = state.field.current
        if not np.isfinite(cur).all():
            bad = np.argwhere(~np.isfinite(cur))[0]
            raise FloatingPointError(
                f"non-finite distribution at step {state.step_index}, "
                f"node/slot {tuple(bad)}")
        return state

    def run(self, sample_every: int = 1, observers=(), oracle=None,
            bounds=(None, None), check_decay=False, record_u=False,
            track_f=False, tol=None) -> RunResult:
        """March to end_time collecting a :class:`PropertyReport`.

        Observers are read-only callables ``(state, solver)`` invoked at
        the sample cadence (every step for 1D problems by default).  The
        final step is always sampled.  ``track_f`` additionally records
        the per-step minimum over all distributions (the object of the
        critical-time-step guarantee) and a distribution-level
        non-negativity verdict.
        """
        from .diagnostics import DEFAULT_TOL, PropertyReport, Verdict

        tol = DEFAULT_TOL if tol is None else tol
        state = self.initial_state()
        report = PropertyReport(cadence=sample_every)
        u_rows = []
        f_min = [np.inf, None]

        def watch_f():
            m = float(state.field.current[self.nonsolid].min())
            if m < f_min[0]:
                f_min[0] = m
                f_min[1] = state.t

        def sample():
            u = state.u
            report.record(state.t, u, self.nonsolid, self.grid.dx,
                          self.grid.ndim, oracle=oracle)
            if record_u:
                u_rows.append(u.copy())
            for obs in observers:
                obs(state, self)

        if track_f:
            watch_f()
        sample()
        n = self.config.n_steps
        for k in range(1, n + 1):
            self.step(state)
            if track_f:
                watch_f()
            if k % sample_every == 0 or k == n:
                sample()
        report.finalize(lower=bounds[0], upper=bounds[1], tol=tol,
                        decay=check_decay)
        if track_f:
            report.meta["f_min"] = f_min[0]
            report.verdicts["distribution_non_negativity"] = Verdict(
                violated=f_min[0] < -tol,
                first_time=f_min[1] if f_min[0] < -tol else None,
                worst_value=f_min[0])
        return RunResult(report=report, state=state,
                         u_series=np.array(u_rows) if record_u else None)


def step(state: TransportState, config: TransportConfig) -> TransportState:
    return TransportSolver(config).step(state)


def run(config: TransportConfig, observers=(), **kwargs) -> RunResult:
    return TransportSolver(config).run(observers=observers, **kwargs)
