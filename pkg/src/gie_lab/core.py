"""Domain types, constants and experiment geometry.

All phase-tier quantities are SI. The two-qubit basis is ordered
(LL, LR, RL, RR), i.e. the first index is particle 1's branch and
``|L> = (1, 0)``, ``|R> = (0, 1)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np


class ValidationError(ValueError):
    """Input violates a documented constraint."""


class UsageError(ValueError):
    """Operation called with an incompatible model or missing argument."""


class BranchLabel(enum.IntEnum):
    L = 0
    R = 1


BRANCHES = (BranchLabel.L, BranchLabel.R)
BRANCH_PAIRS = tuple((k, l) for k in BRANCHES for l in BRANCHES)


@dataclass(frozen=True)
class PhysicalConstants:
    G: float = 6.674e-11
    hbar: float = 1.054571817e-34

    def __post_init__(self):
        if not (self.G > 0 and self.hbar > 0):
            raise ValidationError("constants must satisfy G > 0 and hbar > 0")


@dataclass(frozen=True)
class ExperimentGeometry:
    """Two masses a distance ``d`` apart, each split by ``delta`` along x."""

    d: float = 450e-6
    delta: float = 250e-6
    m1: float = 1e-14
    m2: float = 1e-14

    def __post_init__(self):
        for name in ("d", "delta", "m1", "m2"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValidationError(f"{name} > 0 required (got {value!r})")
        if not self.d > self.delta:
            raise ValidationError(
                f"d > delta required (got d={self.d!r}, delta={self.delta!r})"
            )

    def gamma(self, consts: PhysicalConstants) -> float:
        """Coupling rate G m1 m2 / hbar, in m/s."""
        return consts.G * self.m1 * self.m2 / consts.hbar


def branch_centers(geom: ExperimentGeometry) -> Tuple[float, float, float, float]:
    """Return ``(X1L, X1R, X2L, X2R)`` as signed x-coordinates."""
    half_d, half_delta = geom.d / 2, geom.delta / 2
    return (
        -half_d - half_delta,
        -half_d + half_delta,
        half_d - half_delta,
        half_d + half_delta,
    )


def center(geom: ExperimentGeometry, particle: int, branch: BranchLabel) -> float:
    x1l, x1r, x2l, x2r = branch_centers(geom)
    table = {(1, 0): x1l, (1, 1): x1r, (2, 0): x2l, (2, 1): x2r}
    return table[(particle, int(branch))]


def pair_separations(geom: ExperimentGeometry) -> np.ndarray:
    """2x2 array ``r[k, l] = |X1k - X2l|``.

    Written in closed form (d, d+delta, d-delta, d) rather than by
    subtracting centers so the diagonal is exactly ``d``.
    """
    d, delta = geom.d, geom.delta
    return np.array([[d, d + delta], [d - delta, d]])


@dataclass(frozen=True)
class PhaseTable:
    """Accumulated branch phases ``gamma[k, l]`` in radians.

    ``separable_parts`` is ``(g1, g2)`` with ``g1[k]``, ``g2[l]`` the
    per-particle phases; present only for additively separable models.
    """

    gamma: np.ndarray
    separable_parts: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        if gamma.shape != (2, 2) or not np.all(np.isfinite(gamma)):
            raise ValidationError("gamma must be a finite 2x2 array")
        object.__setattr__(self, "gamma", gamma)
        if self.separable_parts is not None:
            g1, g2 = (np.asarray(p, dtype=float) for p in self.separable_parts)
            if g1.shape != (2,) or g2.shape != (2,):
                raise ValidationError("separable parts must be two length-2 arrays")
            object.__setattr__(self, "separable_parts", (g1, g2))
            if not self.is_consistent():
                raise ValidationError("gamma[k, l] != g1[k] + g2[l]")

    @classmethod
    def from_parts(cls, g1, g2) -> "PhaseTable":
        g1, g2 = np.asarray(g1, dtype=float), np.asarray(g2, dtype=float)
        return cls(g1[:, None] + g2[None, :], (g1, g2))

    @property
    def is_separable(self) -> bool:
        return self.separable_parts is not None

    def is_consistent(self, rtol: float = 1e-12) -> bool:
        if self.separable_parts is None:
            return True
        g1, g2 = self.separable_parts
        expected = g1[:, None] + g2[None, :]
        scale = max(1.0, float(np.max(np.abs(expected))))
        return bool(np.max(np.abs(self.gamma - expected)) <= rtol * scale)

    def __getitem__(self, kl):
        k, l = kl
        return self.gamma[int(k), int(l)]


@dataclass(frozen=True)
class TwoQubitPureState:
    """Four amplitudes in (LL, LR, RL, RR) order.

    ``is_dynamical`` is False for states that are not solutions of any
    model's dynamics (the diagonal-phase construction).
    """

    amps: np.ndarray
    is_dynamical: bool = True

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.shape != (4,):
            raise ValidationError("a two-qubit state needs 4 amplitudes")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"state not normalized (norm {norm!r})")
        object.__setattr__(self, "amps", amps)

    @property
    def matrix(self) -> np.ndarray:
        """Amplitudes as ``M[k, l]``."""
        return self.amps.reshape(2, 2)

    def density(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())


@dataclass(frozen=True)
class TwoQubitMixedState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValidationError("density matrix must be 4x4")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValidationError("density matrix not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValidationError("density matrix trace != 1")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-12:
            raise ValidationError("density matrix not positive semidefinite")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_pure(cls, state: TwoQubitPureState) -> "TwoQubitMixedState":
        return cls(state.density())


# -- potential models ---------------------------------------------------------


@dataclass(frozen=True)
class Newton:
    """Pairwise Newtonian coupling; not additively separable."""

    separable = False


@dataclass(frozen=True)
class NS:
    """Newton-Schrodinger mean field sourced by |psi|^2, self-interaction dropped."""

    include_self: bool = False
    separable = True


@dataclass(frozen=True)
class NSB:
    """Newton-Schrodinger-Bohm: potential sourced by actual positions.

    In the phase tier ``branch`` fixes which branch centers the
    configuration sits at. The grid solver uses a live BohmianConfig.
    """

    branch: Tuple[BranchLabel, BranchLabel] = (BranchLabel.L, BranchLabel.L)
    separable = True

    def __post_init__(self):
        m, n = self.branch
        object.__setattr__(self, "branch", (BranchLabel(m), BranchLabel(n)))


@dataclass(frozen=True)
class SeparableGeneric:
    """Caller-supplied single-particle potentials ``v1(x1)`` and ``v2(x2)``.

    The phase tier evaluates them at the branch centers (SI energy);
    the grid solver evaluates them on the grid (dimensionless energy).
    """

    v1: Callable = field(default=lambda x: 0.0 * np.asarray(x, dtype=float))
    v2: Callable = field(default=lambda x: 0.0 * np.asarray(x, dtype=float))
    separable = True


@dataclass(frozen=True)
class DGDiagonal:
    """Diagonal-phase state built from a separable branch-phase family.

    ``family(branch, t)`` must return a separable PhaseTable. ``None``
    selects the NSB family.
    """

    family: Optional[Callable] = None
    separable = False


PotentialModel = (Newton, NS, NSB, SeparableGeneric, DGDiagonal)
