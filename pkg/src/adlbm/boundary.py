"""Boundary discretizations applied after streaming.

Per-node operations implement the standard and weighted-splitting
Dirichlet fills, the flux (Neumann) fill, and solid-wall bounce-back.
:class:`BoundaryPlan` compiles a grid's boundary work into index arrays
so a time step applies every fill vectorized; plan construction
guarantees each (node, slot) pair has exactly one writer (the
write-once corner guard is a build-time check here).

Prescribed values u_p / q_p are callables ``(coords, t) -> array`` and
are evaluated at the new time level t + dt.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .lattice import (DistributionField, Grid, LatticeModel, NodeTag,
                      _shift_slices as _shift, unknown_slots)


class BCKind(Enum):
    DIRICHLET_STANDARD = "standard"
    DIRICHLET_WEIGHTED_SPLIT = "weighted_split"
    NEUMANN_FLUX = "neumann"
    BOUNCE_BACK = "bounce_back"
    # Zero-gradient copy of unknown slots from the upstream neighbor;
    # realizes the first-order extrapolation outflow / zero-diffusive-flux
    # outlet.  Not one of the transport paper-level conditions.
    OUTFLOW = "outflow"


@dataclass
class BoundaryAssignment:
    """Resolved boundary treatment of one node."""

    node: tuple
    kind: BCKind
    unknown: np.ndarray        # direction indices with no streaming source
    normal: np.ndarray = None
    value: object = None       # u_p or q_p callable for Dirichlet/Neumann


# ---------------------------------------------------------------------------
# per-node operations


def apply_dirichlet_standard(f, unknown, u_p, model: LatticeModel):
    """Fill the unknown slots so the node's concentration equals u_p.

    f_a = w_a / (sum_j w_j) * (u_p - sum_known f_q) for a in {j}.  The
    known slots are every other entry of ``f`` (unknown slots must hold
    zero on entry, which post-stream buffers guarantee).
    """
    unknown = np.asarray(unknown)
    if unknown.size == 0:
        raise ValueError("standard Dirichlet fill requires a nonempty unknown set")
    out = np.array(f, dtype=float)
    out[unknown] = 0.0
    known_sum = out.sum()
    w_unknown = model.weights[unknown]
    out[unknown] = w_unknown / w_unknown.sum() * (u_p - known_sum)
    return out


def apply_dirichlet_weighted_split(u_p, model: LatticeModel):
    """f_a = w_a * u_p for every direction; sign preserving for u_p >= 0."""
    return model.weights * u_p


def apply_neumann(f_post_collision, unknown, q_p, normal, model: LatticeModel,
                  c_s: float):
    """Fill unknown slots at t + dt from the time-t post-collision values.

    f_a(t+dt) = fhat_beta(t) + q_p(t+dt)/c_s * (e_a.n) / (sum_{k in j} e_k.n)
    with beta the opposite of a.  q_p = 0 reduces to pure bounce-back.
    """
    unknown = np.asarray(unknown)
    filled = np.empty(unknown.size, dtype=float)
    e_dot_n = model.velocities[unknown] @ np.asarray(normal, dtype=float)
    denom = e_dot_n.sum()
    if q_p != 0.0:
        if (e_dot_n >= 0).any():
            raise ValueError("prescribed-flux node has an unknown direction "
                             "with e.n >= 0")
        if denom == 0.0:
            raise ValueError("degenerate flux node: unknown directions have "
                             "zero normal sum")
    for k, a in enumerate(unknown):
        filled[k] = f_post_collision[model.opposite[a]]
    if q_p != 0.0:
        filled += q_p / c_s * e_dot_n / denom
    return filled


def bounce_back(f_post_collision, wall_directions, model: LatticeModel):
    """Reflect post-collision populations on links into solids.

    For each direction b pointing into a solid neighbor, the slot
    opposite(b) receives fhat_b.  Returns (slots, values).
    """
    wall_directions = np.asarray(wall_directions)
    slots = model.opposite[wall_directions]
    values = np.array([f_post_collision[b] for b in wall_directions], dtype=float)
    return slots, values


# ---------------------------------------------------------------------------
# compiled plan


def _flat(idx, dims):
    return np.ravel_multi_index(tuple(idx.T), dims)


@dataclass
class BoundaryPlan:
    """Vectorized boundary work for one grid/model/BC combination."""

    grid: Grid
    model: LatticeModel
    assignments: list = field(default_factory=list)
    # compiled gather/scatter arrays
    _bb_node: np.ndarray = None     # flat node index per reflected link
    _bb_slot: np.ndarray = None
    _bb_src: np.ndarray = None
    _nm_node: np.ndarray = None
    _nm_slot: np.ndarray = None
    _nm_src: np.ndarray = None
    _nm_ratio: np.ndarray = None
    _nm_coords: np.ndarray = None
    _nm_q: object = None
    _ds_nodes: np.ndarray = None    # standard Dirichlet node flat indices
    _ds_mask: np.ndarray = None     # (n_nodes, m) unknown mask
    _ds_coords: np.ndarray = None
    _ds_u: object = None
    _dw_nodes: np.ndarray = None
    _dw_coords: np.ndarray = None
    _dw_u: object = None
    _of_node: np.ndarray = None
    _of_slot: np.ndarray = None
    _of_src: np.ndarray = None

    def apply(self, field: DistributionField, t_new: float):
        """Fill every unknown slot of the freshly streamed buffer.

        ``field.current`` is the post-stream buffer being completed;
        ``field.next`` still holds the post-collision values of the
        previous time level.
        """
        new = field.current.reshape(-1, self.model.m)
        old = field.next.reshape(-1, self.model.m)
        if self._bb_node is not None:
            new[self._bb_node, self._bb_slot] = old[self._bb_node, self._bb_src]
        if self._nm_node is not None:
            new[self._nm_node, self._nm_slot] = old[self._nm_node, self._nm_src]
            if self._nm_q is not None:
                q = np.broadcast_to(
                    np.asarray(self._nm_q(self._nm_coords, t_new), dtype=float),
                    self._nm_node.shape)
                np.add.at(new, (self._nm_node, self._nm_slot), q * self._nm_ratio)
        if self._ds_nodes is not None:
            u_p = np.broadcast_to(
                np.asarray(self._ds_u(self._ds_coords, t_new), dtype=float),
                self._ds_nodes.shape)
            block = new[self._ds_nodes]
            block[self._ds_mask] = 0.0
            known = block.sum(axis=1)
            w = self.model.weights[None, :] * self._ds_mask
            block += w / w.sum(axis=1, keepdims=True) * (u_p - known)[:, None]
            new[self._ds_nodes] = block
        if self._dw_nodes is not None:
            u_p = np.broadcast_to(
                np.asarray(self._dw_u(self._dw_coords, t_new), dtype=float),
                self._dw_nodes.shape)
            new[self._dw_nodes] = u_p[:, None] * self.model.weights[None, :]
        if self._of_node is not None:
            new[self._of_node, self._of_slot] = new[self._of_src, self._of_slot]


def build_plan(grid: Grid, model: LatticeModel, *,
               dirichlet_value=None, neumann_flux=None,
               dirichlet_method: str = "standard",
               outflow_mask=None) -> BoundaryPlan:
    """Compile the boundary work implied by the grid's node tags.

    Dirichlet nodes use ``dirichlet_method``; Neumann-tagged nodes use
    the flux fill except where ``outflow_mask`` selects the zero-gradient
    outlet treatment; interior nodes with solid neighbors bounce back.
    Every unknown slot must end up with exactly one writer, otherwise the
    geometry is rejected.
    """
    plan = BoundaryPlan(grid=grid, model=model)
    if grid.periodic:
        return plan
    unk = unknown_slots(grid, model)
    # The standard Dirichlet method's known set is the rest direction plus
    # every slot streamed from an interior node; slots arriving from other
    # boundary nodes are re-prescribed as well.  (This also keeps re-entrant
    # ring corners on diagonal-free lattices well posed.)
    dir_unk = unk.copy()
    interior = grid.tags == NodeTag.INTERIOR
    for i in range(model.m):
        off = model.velocities[i]
        if not off.any():
            continue
        src_interior = np.zeros(grid.dims, dtype=bool)
        dst, src = _shift(off, grid.dims)
        src_interior[dst] = interior[src]
        dir_unk[..., i] |= ~src_interior
    tags = grid.tags
    coords = grid.coordinates()
    dims = grid.dims
    m = model.m
    writers = np.zeros(grid.dims + (m,), dtype=np.int8)
    solid = tags == NodeTag.SOLID
    if outflow_mask is None:
        outflow_mask = np.zeros(dims, dtype=bool)
    q_is_zero = neumann_flux is None

    dir_mask = tags == NodeTag.DIRICHLET
    neu_mask = (tags == NodeTag.NEUMANN) & ~outflow_mask
    of_mask = outflow_mask & ~dir_mask
    int_mask = tags == NodeTag.INTERIOR

    # interior nodes: every unknown slot must come from a solid neighbor
    bb_nodes = np.argwhere(int_mask & unk.any(axis=-1))
    bb_node_l, bb_slot_l, bb_src_l = [], [], []
    for idx in bb_nodes:
        node = tuple(idx)
        for a in np.nonzero(unk[node])[0]:
            src_node = tuple(np.asarray(node) - model.velocities[a])
            inside = all(0 <= s < n for s, n in zip(src_node, dims))
            if not inside or not solid[src_node]:
                raise ValueError(f"interior node {node} streams from outside "
                                 "the domain; tag it as a boundary node")
            bb_node_l.append(node)
            bb_slot_l.append(a)
            bb_src_l.append(model.opposite[a])
            writers[node + (a,)] += 1
        plan.assignments.append(BoundaryAssignment(
            node=node, kind=BCKind.BOUNCE_BACK, unknown=np.nonzero(unk[node])[0]))
    if bb_node_l:
        plan._bb_node = _flat(np.array(bb_node_l), dims)
        plan._bb_slot = np.array(bb_slot_l)
        plan._bb_src = np.array(bb_src_l)

    # flux boundary nodes
    nm_nodes = np.argwhere(neu_mask)
    nm_node_l, nm_slot_l, nm_src_l, nm_ratio_l, nm_coord_l = [], [], [], [], []
    for idx in nm_nodes:
        node = tuple(idx)
        js = np.nonzero(unk[node])[0]
        if js.size == 0:
            raise ValueError(f"flux node {node} has no unknown directions")
        n_hat = grid.normals[node]
        e_dot_n = model.velocities[js] @ n_hat
        denom = e_dot_n.sum()
        if not q_is_zero:
            if (e_dot_n >= 0).any() or denom == 0.0:
                raise ValueError(f"flux node {node} violates the e.n < 0 "
                                 "condition; only q_p = 0 is supported there")
            ratio = e_dot_n / denom
        else:
            ratio = np.zeros_like(e_dot_n)
        for k, a in enumerate(js):
            nm_node_l.append(node)
            nm_slot_l.append(a)
            nm_src_l.append(model.opposite[a])
            nm_ratio_l.append(ratio[k])
            nm_coord_l.append(coords[node])
            writers[node + (a,)] += 1
        plan.assignments.append(BoundaryAssignment(
            node=node, kind=BCKind.NEUMANN_FLUX, unknown=js,
            normal=n_hat, value=neumann_flux))
    if nm_node_l:
        plan._nm_node = _flat(np.array(nm_node_l), dims)
        plan._nm_slot = np.array(nm_slot_l)
        plan._nm_src = np.array(nm_src_l)
        plan._nm_coords = np.array(nm_coord_l)
        if not q_is_zero:
            plan._nm_ratio = np.array(nm_ratio_l) / grid.c_s_sq(model) ** 0.5
            plan._nm_q = neumann_flux

    # Dirichlet nodes claim all their slots (weighted) or the unknowns
    d_nodes = np.argwhere(dir_mask)
    ds_nodes_l, ds_mask_l, ds_coord_l = [], [], []
    dw_nodes_l, dw_coord_l = [], []
    for idx in d_nodes:
        node = tuple(idx)
        js = np.nonzero(dir_unk[node])[0]
        if dirichlet_method == "weighted_split":
            dw_nodes_l.append(node)
            dw_coord_l.append(coords[node])
            writers[node] += 1
            kind = BCKind.DIRICHLET_WEIGHTED_SPLIT
        elif dirichlet_method == "standard":
            if js.size == 0:
                # e.g. re-entrant corners on diagonal-free lattices: every
                # slot streams in, so there is nothing for the standard
                # fill to adjust and the node's concentration floats
                continue
            ds_nodes_l.append(node)
            row = np.zeros(m, dtype=bool)
            row[js] = True
            ds_mask_l.append(row)
            ds_coord_l.append(coords[node])
            writers[node + (slice(None),)][js] += 1
            kind = BCKind.DIRICHLET_STANDARD
        else:
            raise ValueError(f"unknown Dirichlet method {dirichlet_method!r}")
        plan.assignments.append(BoundaryAssignment(
            node=node, kind=kind, unknown=js,
            normal=grid.normals[node], value=dirichlet_value))
    if ds_nodes_l:
        plan._ds_nodes = _flat(np.array(ds_nodes_l), dims)
        plan._ds_mask = np.array(ds_mask_l)
        plan._ds_coords = np.array(ds_coord_l)
        plan._ds_u = dirichlet_value
    if dw_nodes_l:
        plan._dw_nodes = _flat(np.array(dw_nodes_l), dims)
        plan._dw_coords = np.array(dw_coord_l)
        plan._dw_u = dirichlet_value

    # outflow nodes copy every unknown slot from the upstream neighbor
    of_nodes = np.argwhere(of_mask)
    of_node_l, of_slot_l, of_src_l = [], [], []
    for idx in of_nodes:
        node = tuple(idx)
        js = np.nonzero(unk[node])[0]
        n_hat = grid.normals[node]
        neighbor = tuple((np.asarray(node) - n_hat.astype(np.int64)))
        inside = all(0 <= s < n for s, n in zip(neighbor, dims))
        if not inside or solid[neighbor]:
            raise ValueError(f"outflow node {node} lacks an upstream neighbor")
        for a in js:
            of_node_l.append(node)
            of_slot_l.append(a)
            of_src_l.append(neighbor)
            writers[node + (a,)] += 1
        plan.assignments.append(BoundaryAssignment(
            node=node, kind=BCKind.OUTFLOW, unknown=js, normal=n_hat))
    if of_node_l:
        plan._of_node = _flat(np.array(of_node_l), dims)
        plan._of_slot = np.array(of_slot_l)
        plan._of_src = _flat(np.array(of_src_l), dims)

    # write-once guard: every unknown slot covered exactly once
    uncovered = unk & (writers == 0)
    if uncovered.any():
        node = tuple(np.argwhere(uncovered)[0])
        raise ValueError(f"unfilled streaming slot at node/slot {node}")
    if (writers > 1).any():
        node = tuple(np.argwhere(writers > 1)[0])
        raise ValueError(f"slot {node} has multiple boundary writers")
    return plan
