"""Branch phases and two-qubit states for each gravity model.

Every function is closed form in ``t``: the kinetic term is neglected and
the potential is taken constant over each branch, so the dynamics only
attaches a phase ``gamma_kl(t) = -V(X1k, X2l) t / hbar`` to each branch.
"""
from __future__ import annotations

from functools import partial
from typing import Callable, Dict, Tuple

import numpy as np

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

BranchFamily = Callable[[Tuple[BranchLabel, BranchLabel], float], PhaseTable]


def _check_time(t):
    if not np.isfinite(t) or t < 0:
        raise ValidationError(f"t >= 0 required (got {t!r})")


def newton_phases(geom: ExperimentGeometry, consts: PhysicalConstants, t: float) -> PhaseTable:
    _check_time(t)
    gt = geom.gamma(consts) * t
    return PhaseTable(gt / pair_separations(geom))


def ns_phases(geom: ExperimentGeometry, consts: PhysicalConstants, t: float) -> PhaseTable:
    """Mean-field phases with the common ``2 gamma t / d`` split evenly.

    Follows the two-factor form of the NS state; see README
    for the Born-weight factor discussion.
    """
    _check_time(t)
    gt = geom.gamma(consts) * t
    d, delta = geom.d, geom.delta
    common = gt / d
    g1 = np.array([gt / (d + delta) + common, gt / (d - delta) + common])
    g2 = np.array([gt / (d - delta) + common, gt / (d + delta) + common])
    return PhaseTable.from_parts(g1, g2)


def nsb_branch_phases(
    geom: ExperimentGeometry,
    consts: PhysicalConstants,
    branch: Tuple[BranchLabel, BranchLabel],
    t: float,
) -> PhaseTable:
    """Phases when the configuration sits at branch centers ``(X1m, X2n)``."""
    _check_time(t)
    m, n = (int(b) for b in branch)
    gt = geom.gamma(consts) * t
    r = pair_separations(geom)
    # particle 1 sees X2n, particle 2 sees X1m
    g1 = gt / r[:, n]
    g2 = gt / r[m, :]
    return PhaseTable.from_parts(g1, g2)


def separable_generic_phases(
    model: SeparableGeneric,
    geom: ExperimentGeometry,
    consts: PhysicalConstants,
    t: float,
) -> PhaseTable:
    _check_time(t)
    x1l, x1r, x2l, x2r = branch_centers(geom)
    v1 = np.asarray(model.v1(np.array([x1l, x1r])), dtype=float)
    v2 = np.asarray(model.v2(np.array([x2l, x2r])), dtype=float)
    return PhaseTable.from_parts(-v1 * t / consts.hbar, -v2 * t / consts.hbar)


def nsb_family(geom: ExperimentGeometry, consts: PhysicalConstants) -> BranchFamily:
    """The NSB branch-phase family as a ``family(branch, t)`` callable."""
    return partial(nsb_branch_phases, geom, consts)


def constant_family(rate: float) -> BranchFamily:
    """Family where every branch of every configuration picks up ``rate * t``."""

    def family(branch, t):
        half = 0.5 * rate * t
        return PhaseTable.from_parts([half, half], [half, half])

    return family


def phases_for(model, geom: ExperimentGeometry, consts: PhysicalConstants, t: float) -> PhaseTable:
    if isinstance(model, Newton):
        return newton_phases(geom, consts, t)
    if isinstance(model, NS):
        return ns_phases(geom, consts, t)
    if isinstance(model, NSB):
        return nsb_branch_phases(geom, consts, model.branch, t)
    if isinstance(model, SeparableGeneric):
        return separable_generic_phases(model, geom, consts, t)
    if isinstance(model, DGDiagonal):
        family = model.family or nsb_family(geom, consts)
        return diagonal_phases(family, t)
    raise UsageError(f"unknown potential model {model!r}")


def diagonal_phases(family: BranchFamily, t: float) -> PhaseTable:
    """``gamma[k, l]`` taken from branch (k, l) of the family: not separable."""
    _check_time(t)
    gamma = np.empty((2, 2))
    for k, l in BRANCH_PAIRS:
        gamma[k, l] = family((k, l), t)[k, l]
    return PhaseTable(gamma)


def state_from_phases(table: PhaseTable, is_dynamical: bool = True) -> TwoQubitPureState:
    return TwoQubitPureState(0.5 * np.exp(1j * table.gamma).reshape(4), is_dynamical)


def initial_state() -> TwoQubitPureState:
    return TwoQubitPureState(np.full(4, 0.5, dtype=complex))


def state_at(model, geom: ExperimentGeometry, consts: PhysicalConstants, t: float) -> TwoQubitPureState:
    """``amps[k, l] = exp(i gamma_kl(t)) / 2`` for the given model."""
    table = phases_for(model, geom, consts, t)
    return state_from_phases(table, is_dynamical=not isinstance(model, DGDiagonal))


def dg_branch_states(family: BranchFamily, t: float) -> Dict[Tuple[BranchLabel, BranchLabel], TwoQubitPureState]:
    _check_time(t)
    states = {}
    for branch in BRANCH_PAIRS:
        table = family(branch, t)
        if not table.is_separable:
            raise ValidationError(f"family returned a non-separable table for {branch}")
        states[branch] = state_from_phases(table)
    return states


def dg_diagonal_state(family: BranchFamily, t: float) -> TwoQubitPureState:
    """Diagonal-phase superposition; flagged ``is_dynamical=False``.

    Each term (k, l) carries the phase it would have if the configuration
    were at (k, l). No single run of the dynamics produces this state.
    """
    return state_from_phases(diagonal_phases(family, t), is_dynamical=False)


def nsb_mixture(geom: ExperimentGeometry, consts: PhysicalConstants, t: float) -> TwoQubitMixedState:
    """Equal-weight mixture over the four configuration branches."""
    rho = np.zeros((4, 4), dtype=complex)
    for branch in BRANCH_PAIRS:
        rho += 0.25 * state_from_phases(nsb_branch_phases(geom, consts, branch, t)).density()
    # symmetrize away last-bit asymmetry from the sum
    rho = 0.5 * (rho + rho.conj().T)
    return TwoQubitMixedState(rho)


def sample_nsb_branch(rng: np.random.Generator) -> Tuple[BranchLabel, BranchLabel]:
    """Draw one configuration branch with probability 1/4 each."""
    return BRANCH_PAIRS[int(rng.integers(4))]


def apply_local_phases(amps, g1, g2) -> np.ndarray:
    """Multiply ``amps[k, l]`` by ``exp(i (g1[k] + g2[l]))``."""
    amps = np.asarray(amps, dtype=complex).reshape(2, 2)
    phase = np.exp(1j * np.asarray(g1))[:, None] * np.exp(1j * np.asarray(g2))[None, :]
    return (amps * phase).reshape(4)
