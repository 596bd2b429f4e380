"""Lattice Boltzmann transport solvers with mathematical-property audits.

Single- and multiple-relaxation-time solvers for transient diffusion and
advection-diffusion on D1Q3/D2Q5/D2Q9 lattices, boundary discretizations
(standard and weighted-splitting Dirichlet, prescribed flux, bounce-back),
a D2Q9 flow solver for porous-medium velocity fields, conserved-component
bimolecular reaction transport, and diagnostics that audit solutions
against the maximum principle, the comparison principle, the non-negative
constraint, and the decay property.
"""

from .boundary import (BCKind, BoundaryAssignment, BoundaryPlan,
                       apply_dirichlet_standard, apply_dirichlet_weighted_split,
                       apply_neumann, bounce_back, build_plan)
from .diagnostics import (PropertyReport, Verdict, check_comparison,
                          check_decay, check_maximum_principle,
                          clip_negatives, count_negatives, critical_dt_check,
                          error_norm, integrals, track_extrema)
from .flow import FlowState, macroscopic, ns_equilibrium, run_flow_to_steady
from .lattice import (DistributionField, Grid, LatticeModel, NodeTag,
                      build_lattice, opposite_direction, stream, unknown_slots)
from .mrt import (HWParams, MomentTransform, RelaxationMatrix, collide_mrt,
                  hw_relaxation, moment_relaxation_block, srt_relaxation,
                  yn_relaxation)
from .reaction import Stoichiometry, from_invariants, to_invariants
from .scenarios import (Case, Scenario, ScenarioResult, dispersion_tensor,
                        exact_solution_s3, get_scenario, heterogeneous_tensor,
                        rotated_tensor, run_scenario, scenario_catalog,
                        stream_function_velocity)
from .transport import (RunResult, ScalarDiffusion, TensorDiffusion,
                        TransportConfig, TransportSolver, TransportState,
                        collide_srt, concentration, equilibrium, initialize,
                        relaxation_time)

__version__ = "0.1.0"
