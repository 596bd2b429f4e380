"""Lattice models (D1Q3, D2Q5, D2Q9), the structured grid, and streaming.

Velocities are stored as unit node offsets; the physical cell speed
c = dx/dt scales them at use sites.  Index ordering follows the usual
convention: rest direction first, then axis directions, then diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

C_S_SQ_FACTOR = 1.0 / 3.0  # c_s^2 = c^2/3 for every model shipped here


class NodeTag(IntEnum):
    INTERIOR = 0
    DIRICHLET = 1
    NEUMANN = 2
    SOLID = 3


@dataclass(frozen=True)
class LatticeModel:
    """A DnQm velocity set."""

    name: str
    ndim: int
    m: int
    velocities: np.ndarray  # (m, ndim) unit offsets, components in {-1, 0, +1}
    weights: np.ndarray     # (m,)
    opposite: np.ndarray    # (m,) permutation with e[opposite[i]] == -e[i]
    c_s_sq_factor: float = C_S_SQ_FACTOR

    def c(self, dx, dt):
        return dx / dt

    def c_s_sq(self, dx, dt):
        return self.c_s_sq_factor * (dx / dt) ** 2


_MODELS = {}


def _register(name, ndim, velocities, weights):
    e = np.asarray(velocities, dtype=np.int64)
    w = np.asarray(weights, dtype=np.float64)
    m = len(w)
    opp = np.empty(m, dtype=np.int64)
    for i in range(m):
        matches = np.nonzero((e == -e[i]).all(axis=1))[0]
        opp[i] = matches[0]
    _MODELS[name] = LatticeModel(name=name, ndim=ndim, m=m,
                                 velocities=e, weights=w, opposite=opp)


# D1Q3: rest, +x, -x.
_register("D1Q3", 1, [[0], [1], [-1]], [1 / 2, 1 / 4, 1 / 4])
# D2Q5: rest, +x, -x, +y, -y.
_register("D2Q5", 2, [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]],
          [1 / 3, 1 / 6, 1 / 6, 1 / 6, 1 / 6])
# D2Q9: rest, +x, +y, -x, -y, then diagonals at 45/135/225/315 degrees.
_register("D2Q9", 2,
          [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1],
           [1, 1], [-1, 1], [-1, -1], [1, -1]],
          [4 / 9, 1 / 9, 1 / 9, 1 / 9, 1 / 9, 1 / 36, 1 / 36, 1 / 36, 1 / 36])


def build_lattice(name: str) -> LatticeModel:
    """Return the lattice model for ``name`` in {D1Q3, D2Q5, D2Q9}."""
    try:
        return _MODELS[name]
    except KeyError:
        raise ValueError(f"unknown lattice model {name!r}; "
                         f"choose one of {sorted(_MODELS)}") from None


def opposite_direction(model: LatticeModel, i: int) -> int:
    """Index beta with e_beta = -e_i; the rest direction maps to itself."""
    if not 0 <= i < model.m:
        raise IndexError(f"direction index {i} out of range for {model.name}")
    return int(model.opposite[i])


@dataclass
class Grid:
    """Uniform structured lattice with node classification.

    ``tags`` assigns exactly one :class:`NodeTag` per node.  ``normals``
    stores the axis-aligned unit outward normal for boundary nodes
    (zero rows elsewhere).  Periodic grids are a test topology: every
    node is interior and streaming wraps around.
    """

    dims: tuple
    dx: float
    dt: float
    tags: np.ndarray = None
    normals: np.ndarray = None
    origin: tuple = None
    periodic: bool = False

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0:
            raise ValueError("dx and dt must be positive")
        self.dims = tuple(int(n) for n in self.dims)
        if self.origin is None:
            self.origin = (0.0,) * self.ndim
        if self.tags is None:
            self.tags = np.full(self.dims, NodeTag.INTERIOR, dtype=np.int8)
        else:
            self.tags = np.asarray(self.tags, dtype=np.int8)
            if self.tags.shape != self.dims:
                raise ValueError("tags shape does not match dims")
        if self.normals is None:
            self.normals = np.zeros(self.dims + (self.ndim,))
        boundary = (self.tags == NodeTag.DIRICHLET) | (self.tags == NodeTag.NEUMANN)
        norms = np.linalg.norm(self.normals, axis=-1)
        if boundary.any() and not np.allclose(norms[boundary], 1.0, atol=1e-12):
            raise ValueError("boundary nodes require unit normals")

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def n_nodes(self):
        return int(np.prod(self.dims))

    @property
    def c(self):
        return self.dx / self.dt

    def c_s_sq(self, model: LatticeModel):
        return model.c_s_sq(self.dx, self.dt)

    def coordinates(self):
        """Node coordinate arrays, shape dims + (ndim,)."""
        axes = [self.origin[d] + self.dx * np.arange(n)
                for d, n in enumerate(self.dims)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def nonsolid(self):
        return self.tags != NodeTag.SOLID


@dataclass
class DistributionField:
    """Per-node particle distributions, double buffered."""

    current: np.ndarray
    next: np.ndarray

    @classmethod
    def zeros(cls, grid: Grid, model: LatticeModel):
        shape = grid.dims + (model.m,)
        return cls(np.zeros(shape), np.zeros(shape))

    def swap(self):
        self.current, self.next = self.next, self.current

    def check_finite(self):
        if not np.isfinite(self.current).all():
            bad = np.argwhere(~np.isfinite(self.current))
            raise FloatingPointError(f"non-finite distribution at node/slot {tuple(bad[0])}")


def _shift_slices(offset, dims):
    """(dst, src) slice tuples moving data by ``offset`` without wrap."""
    dst, src = [], []
    for o, n in zip(offset, dims):
        if o >= 0:
            dst.append(slice(o, n))
            src.append(slice(0, n - o))
        else:
            dst.append(slice(0, n + o))
            src.append(slice(-o, n))
    return tuple(dst), tuple(src)


def unknown_slots(grid: Grid, model: LatticeModel) -> np.ndarray:
    """Boolean (dims + (m,)) mask of slots streaming gets no value for.

    A slot (x, i) is unknown when the source node x - e_i lies outside
    the domain or is solid.  Solid nodes themselves have no unknown
    slots (they never participate).  Empty on periodic grids.
    """
    mask = np.zeros(grid.dims + (model.m,), dtype=bool)
    if grid.periodic:
        return mask
    solid = grid.tags == NodeTag.SOLID
    for i in range(model.m):
        off = model.velocities[i]
        if not off.any():
            continue
        filled = np.zeros(grid.dims, dtype=bool)
        dst, src = _shift_slices(off, grid.dims)
        filled[dst] = ~solid[src]
        mask[..., i] = ~filled
    mask[solid] = False
    return mask


def stream(field: DistributionField, grid: Grid, model: LatticeModel) -> DistributionField:
    """Translation step: next[x + e_i, i] = current[x, i]; buffers swapped.

    Slots without an in-domain non-solid source are left at zero for the
    boundary module to fill (see :func:`unknown_slots`).  After the swap
    the retired buffer still holds the pre-stream (post-collision)
    values, which Neumann and bounce-back fills read.
    """
    cur, nxt = field.current, field.next
    if grid.periodic:
        for i in range(model.m):
            off = model.velocities[i]
            nxt[..., i] = np.roll(cur[..., i], shift=tuple(off), axis=tuple(range(grid.ndim)))
        field.swap()
        return field
    solid = grid.tags == NodeTag.SOLID
    nxt[...] = 0.0
    for i in range(model.m):
        off = model.velocities[i]
        if not off.any():
            nxt[..., i] = cur[..., i]
            continue
        dst, src = _shift_slices(off, grid.dims)
        nxt[dst + (i,)] = np.where(solid[src], 0.0, cur[src + (i,)])
    nxt[solid] = 0.0
    field.swap()
    return field
