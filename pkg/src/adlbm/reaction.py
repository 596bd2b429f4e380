"""Instantaneous bimolecular reaction nA A + nB B -> nC C.

The reaction is folded into transport through two conserved components:
the reactant excess psi_F = uA/nA - uB/nB and the product invariant
psi_G = uA/nA + uC/nC.  Both are plain scalar fields transported without
a reaction term; species are recovered pointwise.  In the instantaneous
limit A and B cannot coexist, which makes the recovery map below the
unique one consistent with the stoichiometry and with linearity of
transport:

    uA = nA * max(psi_F, 0)
    uB = -nB * min(psi_F, 0)
    uC = nC * (psi_G - max(psi_F, 0))

uA and uB are non-negative by construction; uC goes negative exactly
where the transported psi_G undershoots max(psi_F, 0), which is how
negative product concentrations are attributed in reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Stoichiometry:
    n_a: int
    n_b: int
    n_c: int

    def __post_init__(self):
        if min(self.n_a, self.n_b, self.n_c) <= 0:
            raise ValueError("stoichiometry coefficients must be positive")


def to_invariants(u_a, u_b, u_c, stoich: Stoichiometry):
    """(psi_F, psi_G) from species concentrations; linear in the inputs."""
    u_a = np.asarray(u_a, dtype=float)
    u_b = np.asarray(u_b, dtype=float)
    u_c = np.asarray(u_c, dtype=float)
    psi_f = u_a / stoich.n_a - u_b / stoich.n_b
    psi_g = u_a / stoich.n_a + u_c / stoich.n_c
    return psi_f, psi_g


def from_invariants(psi_f, psi_g, stoich: Stoichiometry):
    """Recover (uA, uB, uC); round-trips to_invariants exactly."""
    psi_f = np.asarray(psi_f, dtype=float)
    psi_g = np.asarray(psi_g, dtype=float)
    pos = np.maximum(psi_f, 0.0)
    u_a = stoich.n_a * pos
    u_b = -stoich.n_b * np.minimum(psi_f, 0.0)
    u_c = stoich.n_c * (psi_g - pos)
    return u_a, u_b, u_c
