"""Semi-classical gravity models of the two-mass entanglement experiment.

Closed-form branch phases, two-qubit states and witnesses for the
Newtonian, Newton-Schrodinger, Newton-Schrodinger-Bohm and generic
separable models, plus a two-particle grid solver that checks the
no-entanglement property of additively separable potentials.
"""
__version__ = "0.1.0"

from .core import (
    BRANCH_PAIRS,
    BranchLabel,
    DGDiagonal,
    ExperimentGeometry,
    NS,
    NSB,
    Newton,
    PhaseTable,
    PhysicalConstants,
    SeparableGeneric,
    TwoQubitMixedState,
    TwoQubitPureState,
    UsageError,
    ValidationError,
    branch_centers,
    pair_separations,
)
from .diagnostics import (
    entanglement_entropy,
    ppt_min_eigenvalue,
    witness_closed_newton,
    witness_closed_ns,
    witness_closed_nsb,
    witness_general,
    witness_mixed,
    witness_operator,
    witness_pure,
    witness_separable,
)
from .phases import (
    constant_family,
    dg_branch_states,
    dg_diagonal_state,
    newton_phases,
    ns_phases,
    nsb_branch_phases,
    nsb_family,
    nsb_mixture,
    state_at,
)
