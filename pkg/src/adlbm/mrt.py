"""Multiple-relaxation-time collision in moment space.

Anisotropic diffusion tensors enter through the relaxation block acting
on the first-order moments: the block is the matrix inverse of
(I/2 + D / (c_s^2 dt)), so Chapman-Enskog recovery yields the tensor D
and an isotropic d*I reduces the block to (1/tau) I with
tau = d/(dt c_s^2) + 1/2.  Every other moment relaxes at rate 1.

Two constructions are provided: the Yoshida-Nagaoka D2Q5 scheme and,
for D2Q9, the Huang-Wu scheme with its published constants
(c1, c2, alpha1, alpha2) = (1, -2, 8, -8) and unit free rates.  The
Huang-Wu equilibrium moments are the moments of the second-order
equilibrium distribution (including the v (x) v term); with
c_s^2 = c^2/3 that fixes the energy-moment equilibrium to
u (c2 + 3 c1 |v|^2 / c^2), consistent with the published constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import Grid, LatticeModel, build_lattice
from .transport import ScalarDiffusion, relaxation_time, validate_spd

# Moment bases.  Rows are mutually orthogonal, so the inverse is
# M^T scaled by the inverse row norms (exact rationals).

# D2Q5 ordering: rest, +x, -x, +y, -y.
# Rows: density, e_x, e_y, energy deviation, x^2 - y^2 deviator.
_M_D2Q5 = np.array([
    [1, 1, 1, 1, 1],
    [0, 1, -1, 0, 0],
    [0, 0, 0, 1, -1],
    [-4, 1, 1, 1, 1],
    [0, 1, 1, -1, -1],
], dtype=float)
_JROWS_D2Q5 = (1, 2)

# D2Q9 Gram-Schmidt basis in the ordering rest, +x, +y, -x, -y, then
# diagonals (1,1), (-1,1), (-1,-1), (1,-1).
# Rows: density, energy, energy^2, j_x, q_x, j_y, q_y, p_xx, p_xy.
_M_D2Q9 = np.array([
    [1, 1, 1, 1, 1, 1, 1, 1, 1],
    [-4, -1, -1, -1, -1, 2, 2, 2, 2],
    [4, -2, -2, -2, -2, 1, 1, 1, 1],
    [0, 1, 0, -1, 0, 1, -1, -1, 1],
    [0, -2, 0, 2, 0, 1, -1, -1, 1],
    [0, 0, 1, 0, -1, 1, 1, -1, -1],
    [0, 0, -2, 0, 2, 1, 1, -1, -1],
    [0, 1, -1, 1, -1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, -1, 1, -1],
], dtype=float)
_JROWS_D2Q9 = (3, 5)
# Both odd-moment pairs, (j_x, j_y) and (q_x, q_y), carry the diffusion
# block; relaxing the third-order odd pair at a detuned rate leaves a
# slowly growing staggered mode once the transverse block rate nears 2
# (measured on a periodic torus with the dispersive-velocity fields).
_ODD_PAIRS_D2Q9 = ((3, 5), (4, 6))


def _orthogonal_inverse(m):
    norms = (m * m).sum(axis=1)
    return m.T / norms


@dataclass(frozen=True)
class MomentTransform:
    """Distribution-to-moment map and its inverse."""

    matrix: np.ndarray
    inverse: np.ndarray
    j_rows: tuple

    @classmethod
    def for_model(cls, model: LatticeModel):
        if model.name == "D2Q5":
            m, rows = _M_D2Q5, _JROWS_D2Q5
        elif model.name == "D2Q9":
            m, rows = _M_D2Q9, _JROWS_D2Q9
        else:
            raise ValueError(f"no moment basis for {model.name}")
        return cls(matrix=m, inverse=_orthogonal_inverse(m), j_rows=rows)


@dataclass(frozen=True)
class RelaxationMatrix:
    """Matrix of relaxation rates in moment space."""

    matrix: np.ndarray


@dataclass(frozen=True)
class HWParams:
    """Huang-Wu scheme constants; only the published values are supported."""

    c1: float = 1.0
    c2: float = -2.0
    alpha1: float = 8.0
    alpha2: float = -8.0
    rates: tuple = (1.0,) * 9

    def validate(self):
        if (self.c1, self.c2, self.alpha1, self.alpha2) != (1.0, -2.0, 8.0, -8.0):
            raise ValueError("only the published Huang-Wu constants "
                             "(1, -2, 8, -8) are supported")
        if any(s != 1.0 for s in self.rates):
            raise ValueError("only unit free relaxation rates are supported")
        return self


def collide_mrt(f, f_eq, transform: MomentTransform, s: RelaxationMatrix,
                g, dt: float, model: LatticeModel):
    """fhat = M^-1 [ M f - S (M f - M f_eq) ] + dt w g.

    The source lift dt M |w> g maps back through M^-1 to dt w_i g.  With
    S = (1/tau) I this reduces entrywise to the BGK collision.
    """
    f = np.asarray(f, dtype=float)
    f_eq = np.asarray(f_eq, dtype=float)
    lam = transform.inverse @ s.matrix @ transform.matrix
    g = np.asarray(g, dtype=float)
    return f - (f - f_eq) @ lam.T + model.weights * dt * g[..., None]


def srt_relaxation(diffusivity: float, dt: float, c_s_sq: float, m: int) -> RelaxationMatrix:
    """Scalar diffusivity: S = (1/tau) I, the diagonal SRT reduction."""
    tau = relaxation_time(diffusivity, dt, c_s_sq)
    return RelaxationMatrix(matrix=np.eye(m) / tau)


def moment_relaxation_block(d_tensor, dt: float, c_s_sq: float):
    """First-order-moment block (I/2 + D/(c_s^2 dt))^-1 for SPD tensors."""
    d = np.asarray(d_tensor, dtype=float)
    validate_spd(d)
    half = 0.5 * np.eye(2)
    return np.linalg.inv(half + d / (c_s_sq * dt))


def _assemble(transform: MomentTransform, block, free_rates=None,
              odd_pairs=None):
    m = transform.matrix.shape[0]
    s = np.eye(m)
    if free_rates is not None:
        s = np.diag(np.asarray(free_rates, dtype=float))
    for (r0, r1) in (odd_pairs or (transform.j_rows,)):
        s[r0, r0] = block[0, 0]
        s[r0, r1] = block[0, 1]
        s[r1, r0] = block[1, 0]
        s[r1, r1] = block[1, 1]
    return RelaxationMatrix(matrix=s)


def yn_relaxation(d_tensor, dt: float, c: float):
    """Yoshida-Nagaoka D2Q5 transform and relaxation for tensor diffusion.

    Free moments relax at rate 1; the linear equilibrium is used.
    """
    model = build_lattice("D2Q5")
    transform = MomentTransform.for_model(model)
    c_s_sq = model.c_s_sq_factor * c * c
    block = moment_relaxation_block(d_tensor, dt, c_s_sq)
    return transform, _assemble(transform, block)


def hw_relaxation(d_tensor, dt: float, c: float, params: HWParams = None):
    """Huang-Wu D2Q9 transform, relaxation, and equilibrium-moment rule.

    Returns (transform, relaxation, equilibrium_rule) where the rule maps
    (u, v) to equilibrium moments; it is the moment image of the
    second-order equilibrium distribution, whose v (x) v term removes the
    advective deviation from the recovered equation.
    """
    params = (params or HWParams()).validate()
    model = build_lattice("D2Q9")
    transform = MomentTransform.for_model(model)
    c_s_sq = model.c_s_sq_factor * c * c
    block = moment_relaxation_block(d_tensor, dt, c_s_sq)
    s = _assemble(transform, block, free_rates=params.rates,
                  odd_pairs=_ODD_PAIRS_D2Q9)

    def equilibrium_moments(u, v):
        from .flow import ns_equilibrium
        from .transport import equilibrium
        if v is None:
            f_eq = equilibrium(u, None, model, c_s_sq)
        else:
            f_eq = ns_equilibrium(u, v, model, c_s_sq)
        return f_eq @ transform.matrix.T

    return transform, s, equilibrium_moments


def collision_matrix_field(scheme: str, diffusion, grid: Grid, model: LatticeModel):
    """Per-node collision matrices M^-1 S M for the transport loop.

    Returns an (m, m) array when the tensor is homogeneous and a
    dims + (m, m) field otherwise.  A scalar diffusion spec produces the
    diagonal (1/tau) reduction.
    """
    transform = MomentTransform.for_model(model)
    c_s_sq = grid.c_s_sq(model)
    m = model.m
    if isinstance(diffusion, ScalarDiffusion):
        s = srt_relaxation(diffusion.d, grid.dt, c_s_sq, m)
        return transform.inverse @ s.matrix @ transform.matrix

    if scheme == "hw":
        HWParams().validate()
        odd_pairs = _ODD_PAIRS_D2Q9
    elif scheme == "yn":
        odd_pairs = (transform.j_rows,)
    else:
        raise ValueError(f"unknown MRT scheme {scheme!r}")

    coords = grid.coordinates()
    tensors = diffusion.tensor_at(coords)
    homogeneous = tensors.ndim == 2 or bool(
        (tensors == tensors.reshape(-1, 2, 2)[0]).all())
    if tensors.ndim == 2:
        tensors = tensors[None, ...]
    flat = tensors.reshape(-1, 2, 2)
    if homogeneous:
        flat = flat[:1]
    validate_spd(flat)
    blocks = np.linalg.inv(0.5 * np.eye(2) + flat / (c_s_sq * grid.dt))
    s_field = np.broadcast_to(np.eye(m), flat.shape[:1] + (m, m)).copy()
    for (r0, r1) in odd_pairs:
        s_field[:, r0, r0] = blocks[:, 0, 0]
        s_field[:, r0, r1] = blocks[:, 0, 1]
        s_field[:, r1, r0] = blocks[:, 1, 0]
        s_field[:, r1, r1] = blocks[:, 1, 1]
    lam = np.einsum("ij,njk,kl->nil", transform.inverse, s_field, transform.matrix)
    if homogeneous:
        return lam[0]
    return lam.reshape(grid.dims + (m, m))
