"""Witnesses, entanglement entropy and the partial-transpose test."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ExperimentGeometry,
    PhaseTable,
    PhysicalConstants,
    TwoQubitMixedState,
    TwoQubitPureState,
    ValidationError,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class WitnessOperator:
    matrix: np.ndarray


_WITNESS = WitnessOperator(
    np.eye(4, dtype=complex)
    - np.kron(SIGMA_X, SIGMA_X)
    - np.kron(SIGMA_Y, SIGMA_Z)
    - np.kron(SIGMA_Z, SIGMA_Y)
)
_WITNESS.matrix.setflags(write=False)


def witness_operator() -> WitnessOperator:
    """``I - sx sx - sy sz - sz sy`` in the (LL, LR, RL, RR) basis."""
    return _WITNESS


def _real(value: complex) -> float:
    if abs(value.imag) > _IMAG_TOL:
        raise ValidationError(f"expectation value has imaginary part {value.imag!r}")
    return float(value.real)


def witness_pure(state: TwoQubitPureState) -> float:
    if not isinstance(state, TwoQubitPureState):
        state = TwoQubitPureState(state)
    psi = state.amps
    return _real(np.vdot(psi, _WITNESS.matrix @ psi))


def witness_mixed(rho: TwoQubitMixedState) -> float:
    if not isinstance(rho, TwoQubitMixedState):
        rho = TwoQubitMixedState(rho)
    return _real(np.trace(rho.rho @ _WITNESS.matrix))


def witness_general(table: PhaseTable) -> float:
    """Witness of the equal-weight phase state, from its four phases."""
    g = table.gamma if isinstance(table, PhaseTable) else np.asarray(table, dtype=float)
    ll, lr, rl, rr = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    return 1.0 - 0.5 * (
        np.cos(ll - rr)
        + np.cos(lr - rl)
        + np.sin(lr - ll)
        + np.sin(lr - rr)
        + np.sin(rl - ll)
        + np.sin(rl - rr)
    )


def witness_separable(g1L, g1R, g2L, g2R):
    """Witness of a product phase state; never negative. Broadcasts."""
    return 1.0 - np.cos(np.subtract(g1L, g1R)) * np.cos(np.subtract(g2L, g2R))


def _phase_args(geom: ExperimentGeometry, consts: PhysicalConstants, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t >= 0 required")
    gt = geom.gamma(consts) * t
    d, delta = geom.d, geom.delta
    return gt / d, gt / (d + delta), gt / (d - delta)


def witness_closed_newton(geom, consts, t):
    a, b, c = _phase_args(geom, consts, t)
    return 0.5 - 0.5 * np.cos(b - c) + np.sin(a - b) + np.sin(a - c)


def witness_closed_ns(geom, consts, t):
    a, b, c = _phase_args(geom, consts, t)
    return 1.0 - np.cos(b - c) ** 2


def witness_closed_nsb(geom, consts, t):
    a, b, c = _phase_args(geom, consts, t)
    return 1.0 - 0.25 * (np.cos(a - b) + np.cos(a - c)) ** 2


CLOSED_FORMS = {
    "N": witness_closed_newton,
    "NS": witness_closed_ns,
    "NSB": witness_closed_nsb,
}


def schmidt_probabilities(matrix) -> np.ndarray:
    """Squared singular values of a 2x2 amplitude matrix, descending.

    Closed form: for ``M`` with ``||M||_F = 1`` the squares are the
    eigenvalues of ``M M^dagger``, i.e. roots of
    ``lam^2 - lam + |det M|^2``. The small root is taken as
    ``|det M|^2 / lam_big`` to avoid cancellation.
    """
    m = np.asarray(matrix, dtype=complex)
    total = float(np.sum(np.abs(m) ** 2))
    det2 = float(abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) ** 2)
    disc = max(total * total - 4.0 * det2, 0.0)
    big = 0.5 * (total + np.sqrt(disc))
    small = det2 / big if big > 0 else 0.0
    return np.array([big, small])


def entropy_from_probabilities(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0] / np.sum(p)
    return max(0.0, float(-np.sum(p * np.log(p))))


def entanglement_entropy(state: TwoQubitPureState) -> float:
    """Entanglement entropy in nats, in ``[0, ln 2]``."""
    if not isinstance(state, TwoQubitPureState):
        state = TwoQubitPureState(state)
    return entropy_from_probabilities(schmidt_probabilities(state.matrix))


def partial_transpose(rho) -> np.ndarray:
    """Partial transpose over qubit 2."""
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    return r.transpose(0, 3, 2, 1).reshape(4, 4)


def ppt_min_eigenvalue(rho: TwoQubitMixedState) -> float:
    if not isinstance(rho, TwoQubitMixedState):
        rho = TwoQubitMixedState(rho)
    return float(np.min(np.linalg.eigvalsh(partial_transpose(rho.rho))))
