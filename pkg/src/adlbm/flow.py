"""D2Q9 single-relaxation-time solver for incompressible Navier-Stokes.

Produces the frozen steady velocity field consumed by the reactive
transport scenario: velocity inlet via equilibrium fill, zero-gradient
outflow, and half-way bounce-back on solids (channel walls are solid
rows).  Flow and transport share dx and dt, hence the lattice speed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import (DistributionField, Grid, LatticeModel, NodeTag,
                      build_lattice, stream, unknown_slots)

MACH_GUARD = 0.3


def ns_equilibrium(rho, v, model: LatticeModel, c_s_sq: float):
    """Second-order equilibrium: moments (rho, rho v) are exact.

    f_i = w_i rho [1 + e.v/c_s^2 + (e.v)^2/(2 c_s^4) - v.v/(2 c_s^2)].
    """
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    c = np.sqrt(c_s_sq / model.c_s_sq_factor)
    e_phys = model.velocities * c
    ev = v @ e_phys.T                      # (..., m)
    vv = (v * v).sum(axis=-1)[..., None]   # (..., 1)
    return model.weights * rho[..., None] * (
        1.0 + ev / c_s_sq + ev * ev / (2.0 * c_s_sq * c_s_sq)
        - vv / (2.0 * c_s_sq))


def macroscopic(f, model: LatticeModel, c: float):
    """Density and velocity moments of the flow populations."""
    rho = f.sum(axis=-1)
    e_phys = model.velocities * c
    mom = f @ e_phys.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(rho[..., None] > 0, mom / rho[..., None], 0.0)
    return rho, v


@dataclass
class FlowState:
    rho: np.ndarray
    v: np.ndarray
    f: DistributionField
    mu: float
    inlet_velocity: np.ndarray
    steps: int = 0


def _reachable(fluid, seeds):
    """Flood fill over the 4-neighborhood of fluid nodes."""
    reached = seeds & fluid
    frontier = reached.copy()
    while frontier.any():
        grown = np.zeros_like(reached)
        for axis in range(fluid.ndim):
            for shift in (1, -1):
                rolled = np.roll(frontier, shift, axis=axis)
                # roll wraps; mask out the wrapped row/column
                sl = [slice(None)] * fluid.ndim
                sl[axis] = 0 if shift == 1 else -1
                rolled[tuple(sl)] = False
                grown |= rolled
        frontier = grown & fluid & ~reached
        reached |= frontier
    return reached


def run_flow_to_steady(grid: Grid, mu: float, rho0: float, inlet_velocity,
                       inlet_mask, outlet_mask, tol: float = 1e-5,
                       max_steps: int = 60000, check_every: int = 100) -> FlowState:
    """Iterate collide/stream to a steady velocity field.

    Convergence is max nodewise |dv| / max |v| < tol between checks;
    exceeding ``max_steps`` raises.  The returned velocity is frozen for
    the transport problem (zero on solids).
    """
    model = build_lattice("D2Q9")
    c = grid.c
    c_s_sq = grid.c_s_sq(model)
    tau = mu / (rho0 * c_s_sq * grid.dt) + 0.5
    if tau <= 0.5:
        raise ValueError("flow relaxation time must exceed 1/2")

    solid = grid.tags == NodeTag.SOLID
    fluid = ~solid
    if not fluid.any():
        raise ValueError("no fluid nodes in the geometry")
    inlet_mask = np.asarray(inlet_mask, dtype=bool) & fluid
    outlet_mask = np.asarray(outlet_mask, dtype=bool) & fluid
    if not inlet_mask.any() or not outlet_mask.any():
        raise ValueError("geometry blocks the inlet or the outlet")
    if not (_reachable(fluid, inlet_mask) & outlet_mask).any():
        raise ValueError("no fluid path connects the inlet to the outlet")

    inlet_velocity = np.asarray(inlet_velocity, dtype=float)
    v_in = np.broadcast_to(inlet_velocity, (int(inlet_mask.sum()), 2))
    f_inlet = ns_equilibrium(np.full(v_in.shape[0], rho0), v_in, model, c_s_sq)

    # gather arrays: bounce-back links and outlet zero-gradient copies
    unk = unknown_slots(grid, model)
    unk[inlet_mask] = False          # inlet overwrites all slots anyway
    dims = grid.dims
    bb_node, bb_slot, bb_src = [], [], []
    of_node, of_slot, of_src = [], [], []
    for idx in np.argwhere(fluid & unk.any(axis=-1)):
        node = tuple(idx)
        js = np.nonzero(unk[node])[0]
        if outlet_mask[node]:
            n_hat = grid.normals[node]
            neighbor = tuple(np.asarray(node) - n_hat.astype(np.int64))
            for a in js:
                of_node.append(node)
                of_slot.append(a)
                of_src.append(neighbor)
            continue
        for a in js:
            src = tuple(np.asarray(node) - model.velocities[a])
            inside = all(0 <= s < n for s, n in zip(src, dims))
            if not inside or not solid[src]:
                raise ValueError(f"flow node {node} streams from outside the domain")
            bb_node.append(node)
            bb_slot.append(a)
            bb_src.append(model.opposite[a])

    def flat(ix):
        return np.ravel_multi_index(tuple(np.array(ix).T), dims)

    bb_node = flat(bb_node) if bb_node else None
    bb_slot = np.array(bb_slot) if bb_slot is not None and len(bb_slot) else None
    bb_src = np.array(bb_src) if bb_src is not None and len(bb_src) else None
    of_node_f = flat(of_node) if of_node else None
    of_slot = np.array(of_slot) if of_slot else None
    of_src_f = flat(of_src) if of_src else None
    inlet_flat = np.ravel_multi_index(tuple(np.argwhere(inlet_mask).T), dims)

    rho_field = np.where(fluid, rho0, 0.0)
    field = DistributionField(
        current=ns_equilibrium(rho_field, np.zeros(dims + (2,)), model, c_s_sq),
        next=np.zeros(dims + (model.m,)))
    field.current[solid] = 0.0

    v_prev = None
    warned = False
    for step_idx in range(1, max_steps + 1):
        cur = field.current
        rho, v = macroscopic(cur, model, c)
        f_eq = ns_equilibrium(rho, v, model, c_s_sq)
        cur -= (cur - f_eq) / tau
        cur[solid] = 0.0
        stream(field, grid, model)
        new = field.current.reshape(-1, model.m)
        old = field.next.reshape(-1, model.m)
        if bb_node is not None:
            new[bb_node, bb_slot] = old[bb_node, bb_src]
        new[inlet_flat] = f_inlet
        if of_node_f is not None:
            new[of_node_f, of_slot] = new[of_src_f, of_slot]
        if step_idx % check_every == 0 or step_idx == max_steps:
            rho, v = macroscopic(field.current, model, c)
            if not np.isfinite(v).all():
                raise FloatingPointError(f"flow solver diverged at step {step_idx}")
            vmax = np.abs(v[fluid]).max()
            if not warned and vmax / np.sqrt(c_s_sq) >= MACH_GUARD:
                warnings.warn(f"flow Mach number {vmax / np.sqrt(c_s_sq):.2f} "
                              f"exceeds {MACH_GUARD}; low-Mach validity is marginal")
                warned = True
            if v_prev is not None and vmax > 0:
                dv = np.abs(v - v_prev).max()
                if dv / vmax < tol:
                    rho_out, v_out = macroscopic(field.current, model, c)
                    v_out[solid] = 0.0
                    return FlowState(rho=rho_out, v=v_out, f=field, mu=mu,
                                     inlet_velocity=inlet_velocity, steps=step_idx)
            v_prev = v.copy()
    raise RuntimeError(f"flow solver did not reach steady state in {max_steps} steps")
