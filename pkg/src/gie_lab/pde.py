"""Two-particle 1D Schrodinger solver on a periodic grid.

Strang splitting with a spectral kinetic step. The potential is rebuilt
from the current wavefunction (mean-field models) and the current
Bohmian configuration (trajectory-sourced models) at every step.
Units are whatever ``OracleParams`` says: ``hbar = mass = 1`` for the
desk-scale runs, SI for the frozen-kinetic phase check.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import fftconvolve

from .core import (
    DGDiagonal,
    NS,
    NSB,
    Newton,
    SeparableGeneric,
    UsageError,
    ValidationError,
)

log = logging.getLogger(__name__)

NORM_TOL = 1e-8
NORM_DRIFT_PER_STEP = 1e-6
NODE_GUARD = 1e-12
BOUNDARY_MASS = 1e-8


class StabilityError(RuntimeError):
    """Integration became untrustworthy; ``step`` is the failing step index."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class NodeProximityError(StabilityError):
    def __init__(self, density, step=None):
        super().__init__(
            f"configuration too close to a node of psi (|psi|^2 = {density:.3e}); "
            "shrink dt or resample",
            step,
        )
        self.density = density


class DomainExitError(StabilityError):
    pass


@dataclass(frozen=True)
class Grid1D:
    n: int = 256
    x_min: float = -16.0
    x_max: float = 16.0

    def __post_init__(self):
        if self.n < 64 or self.n & (self.n - 1):
            raise ValidationError(f"n must be a power of two >= 64 (got {self.n})")
        if not self.x_max > self.x_min:
            raise ValidationError("x_max > x_min required")
        if not np.isclose(self.x_min, -self.x_max, rtol=1e-12, atol=0):
            raise ValidationError("domain must be symmetric about 0")

    @classmethod
    def symmetric(cls, n: int, half_width: float) -> "Grid1D":
        return cls(n, -half_width, half_width)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def nearest(self, x: float) -> int:
        return int(np.argmin(np.abs(self.x - x)))


@dataclass
class Wavefunction2D:
    """``amps[a, b]`` ~ psi(x1_a, x2_b)."""

    amps: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (self.grid.n, self.grid.n):
            raise ValidationError("amplitude array does not match the grid")

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2) * self.grid.dx**2)

    def normalized(self) -> "Wavefunction2D":
        return Wavefunction2D(self.amps / np.sqrt(self.norm), self.grid)

    def density(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def marginals(self) -> Tuple[np.ndarray, np.ndarray]:
        """Single-particle densities (each integrates to the norm)."""
        rho = self.density()
        dx = self.grid.dx
        return rho.sum(axis=1) * dx, rho.sum(axis=0) * dx

    def copy(self) -> "Wavefunction2D":
        return Wavefunction2D(self.amps.copy(), self.grid)


@dataclass(frozen=True)
class BohmianConfig:
    """Actual positions. Floats for one trajectory, arrays for an ensemble."""

    X1: float
    X2: float

    def as_arrays(self):
        return np.atleast_1d(np.asarray(self.X1, float)), np.atleast_1d(np.asarray(self.X2, float))


@dataclass(frozen=True)
class OracleParams:
    mass1: float = 1.0
    mass2: float = 1.0
    g: float = 1.0
    eps: Optional[float] = None  # None -> 2 dx
    dt: float = 1e-3
    steps: int = 1000
    model: object = field(default_factory=NS)
    hbar: float = 1.0
    kinetic: bool = True
    interp: str = "spectral"

    def __post_init__(self):
        if not np.isfinite(self.dt) or self.dt == 0:
            raise ValidationError("dt must be finite and nonzero")
        if self.steps < 0:
            raise ValidationError("steps >= 0 required")
        if self.g < 0:
            raise ValidationError("g >= 0 required")
        if self.mass1 <= 0 or self.mass2 <= 0 or self.hbar <= 0:
            raise ValidationError("masses and hbar must be positive")
        if self.interp not in ("spectral", "bilinear"):
            raise ValidationError("interp must be 'spectral' or 'bilinear'")
        if isinstance(self.model, DGDiagonal):
            raise UsageError("the diagonal-phase construction has no grid dynamics")

    def softening(self, grid: Grid1D) -> float:
        eps = 2 * grid.dx if self.eps is None else self.eps
        if eps < grid.dx * (1 - 1e-12):
            raise ValidationError(f"eps >= dx required (eps={eps}, dx={grid.dx})")
        return eps


# -- initial states -----------------------------------------------------------


def _gaussian(x, c, s):
    return np.exp(-((x - c) ** 2) / (4 * s * s))


def _check_fit(grid: Grid1D, centers, width):
    if width < 2 * grid.dx:
        raise ValidationError(f"width {width} below resolution guard 2*dx = {2 * grid.dx}")
    for c in np.atleast_1d(centers):
        if abs(c) + 4 * width >= grid.x_max:
            raise ValidationError(f"packet at {c} (width {width}) does not fit the domain")


def gaussian_factor(centers, width: float, grid: Grid1D, phases=None) -> np.ndarray:
    """Normalized 1D superposition of Gaussians; ``width`` is the density std."""
    centers = np.atleast_1d(np.asarray(centers, float))
    _check_fit(grid, centers, width)
    phases = np.zeros(len(centers)) if phases is None else np.asarray(phases, float)
    psi = sum(np.exp(1j * p) * _gaussian(grid.x, c, width) for c, p in zip(centers, phases))
    return psi / np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)


def gaussian_product(centers, widths, grid: Grid1D) -> Wavefunction2D:
    """Product state. Each entry of ``centers`` may itself be a sequence,
    giving a superposition of packets for that particle."""
    c1, c2 = centers
    s1, s2 = widths
    f1 = gaussian_factor(c1, s1, grid)
    f2 = gaussian_factor(c2, s2, grid)
    return Wavefunction2D(np.outer(f1, f2), grid)


def entangled_peaks(peaks: Sequence[Tuple[float, float]], width: float, grid: Grid1D) -> Wavefunction2D:
    """Equal superposition of 2D Gaussian packets at the given (x1, x2) points."""
    amps = np.zeros((grid.n, grid.n), dtype=complex)
    for a, b in peaks:
        _check_fit(grid, [a, b], width)
        amps += np.outer(_gaussian(grid.x, a, width), _gaussian(grid.x, b, width))
    return Wavefunction2D(amps, grid).normalized()


# -- potentials ---------------------------------------------------------------


def soft_kernel(r, eps):
    return 1.0 / np.sqrt(np.asarray(r) ** 2 + eps**2)


def _mean_field(grid: Grid1D, density: np.ndarray, eps: float) -> np.ndarray:
    """``out[a] = sum_b K(x_a - x_b) density[b] dx`` by linear convolution."""
    n = grid.n
    offsets = grid.dx * np.arange(-(n - 1), n)
    full = fftconvolve(density, soft_kernel(offsets, eps), mode="full")
    return full[n - 1 : 2 * n - 1] * grid.dx


def potential_parts(model, wf: Wavefunction2D, config: Optional[BohmianConfig], params: OracleParams, sources=None):
    """``(V1, V2)`` on the grid for a separable model.

    ``sources`` overrides what the potential is built from: marginals
    ``(rho1, rho2)`` for NS, a BohmianConfig for NSB.
    """
    grid = wf.grid
    eps = params.softening(grid)
    g = params.g
    x = grid.x
    if isinstance(model, NS):
        rho1, rho2 = wf.marginals() if sources is None else sources
        v1 = -g * _mean_field(grid, rho2, eps)
        v2 = -g * _mean_field(grid, rho1, eps)
        if model.include_self:
            v1 = v1 - g * _mean_field(grid, rho1, eps)
            v2 = v2 - g * _mean_field(grid, rho2, eps)
        return v1, v2
    if isinstance(model, NSB):
        cfg = config if sources is None else sources
        if cfg is None:
            raise UsageError("the NSB potential needs a BohmianConfig")
        return -g * soft_kernel(x - cfg.X2, eps), -g * soft_kernel(x - cfg.X1, eps)
    if isinstance(model, SeparableGeneric):
        return (
            np.broadcast_to(np.asarray(model.v1(x), float), x.shape).copy(),
            np.broadcast_to(np.asarray(model.v2(x), float), x.shape).copy(),
        )
    raise UsageError(f"{type(model).__name__} is not additively separable")


def potential_grid(model, wf: Wavefunction2D, config: Optional[BohmianConfig] = None, params: Optional[OracleParams] = None) -> np.ndarray:
    params = params or OracleParams(model=model)
    grid = wf.grid
    if isinstance(model, Newton):
        eps = params.softening(grid)
        return -params.g * soft_kernel(grid.x[:, None] - grid.x[None, :], eps)
    v1, v2 = potential_parts(model, wf, config, params)
    return v1[:, None] + v2[None, :]


def potential_rank1_residual(v: np.ndarray, dt: float, hbar: float = 1.0) -> float:
    """Relative distance of ``exp(-i V dt / hbar)`` from its best rank-1 approximation.

    Zero (to rounding) iff the phase factor is a tensor product, i.e. the
    potential splits as V1(x1) + V2(x2).
    """
    s = np.linalg.svd(np.exp(-1j * v * dt / hbar), compute_uv=False)
    return float(np.sqrt(max(np.sum(s[1:] ** 2), 0.0) / np.sum(s**2)))


# -- Bohmian guidance ---------------------------------------------------------


class _Guidance:
    """psi and its gradient evaluable off-grid, psi frozen."""

    def __init__(self, wf: Wavefunction2D, params: OracleParams):
        self.grid = wf.grid
        self.params = params
        self.amps = wf.amps
        self.hat = np.fft.fft2(wf.amps)
        self.max_density = float(np.max(np.abs(wf.amps) ** 2))
        if params.interp == "bilinear":
            ik = 1j * self.grid.k
            self.d1 = np.fft.ifft2(ik[:, None] * self.hat)
            self.d2 = np.fft.ifft2(ik[None, :] * self.hat)

    def _basis(self, X):
        # trig interpolant with the Nyquist mode split symmetrically, so real
        # grid data stays real between nodes
        grid = self.grid
        k = grid.k
        arg = np.outer(k, X - grid.x_min)
        e = np.exp(1j * arg)
        de = 1j * k[:, None] * e
        ny = grid.n // 2
        kn = abs(k[ny])
        e[ny] = np.cos(kn * (X - grid.x_min))
        de[ny] = -kn * np.sin(kn * (X - grid.x_min))
        return e, de

    def _spectral(self, X1, X2):
        n = self.grid.n
        e1, de1 = self._basis(X1)
        e2, de2 = self._basis(X2)
        a = self.hat @ e2
        b = self.hat @ de2
        psi = np.sum(e1 * a, axis=0) / n**2
        d1 = np.sum(de1 * a, axis=0) / n**2
        d2 = np.sum(e1 * b, axis=0) / n**2
        return psi, d1, d2

    def _bilinear(self, X1, X2):
        grid = self.grid
        n = grid.n
        u = (X1 - grid.x_min) / grid.dx
        v = (X2 - grid.x_min) / grid.dx
        i0 = np.floor(u).astype(int)
        j0 = np.floor(v).astype(int)
        fu, fv = u - i0, v - j0
        i0, j0 = i0 % n, j0 % n
        i1, j1 = (i0 + 1) % n, (j0 + 1) % n

        def interp(f):
            return (
                f[i0, j0] * (1 - fu) * (1 - fv)
                + f[i1, j0] * fu * (1 - fv)
                + f[i0, j1] * (1 - fu) * fv
                + f[i1, j1] * fu * fv
            )

        return interp(self.amps), interp(self.d1), interp(self.d2)

    def velocity(self, X1, X2):
        X1 = np.atleast_1d(np.asarray(X1, float))
        X2 = np.atleast_1d(np.asarray(X2, float))
        if self.params.interp == "spectral":
            psi, d1, d2 = self._spectral(X1, X2)
        else:
            psi, d1, d2 = self._bilinear(X1, X2)
        dens = np.abs(psi) ** 2
        worst = float(np.min(dens))
        if worst <= NODE_GUARD * self.max_density:
            raise NodeProximityError(worst)
        p = self.params
        return p.hbar / p.mass1 * (d1 / psi).imag, p.hbar / p.mass2 * (d2 / psi).imag


def _pack(config: BohmianConfig, v1, v2):
    if np.ndim(config.X1) == 0:
        return float(v1[0]), float(v2[0])
    return v1, v2


def bohmian_velocity(wf: Wavefunction2D, config: BohmianConfig, params: Optional[OracleParams] = None):
    """``v_i = (hbar / m_i) Im(d_i psi / psi)`` at the configuration."""
    params = params or OracleParams()
    v1, v2 = _Guidance(wf, params).velocity(config.X1, config.X2)
    return _pack(config, v1, v2)


def _rk4(field_fn, y1, y2, dt):
    k1 = field_fn(y1, y2)
    k2 = field_fn(y1 + 0.5 * dt * k1[0], y2 + 0.5 * dt * k1[1])
    k3 = field_fn(y1 + 0.5 * dt * k2[0], y2 + 0.5 * dt * k2[1])
    k4 = field_fn(y1 + dt * k3[0], y2 + dt * k3[1])
    return (
        y1 + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        y2 + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
    )


def step_bohmian(config: BohmianConfig, wf: Wavefunction2D, dt: float, params: Optional[OracleParams] = None) -> BohmianConfig:
    """One RK4 step of the guidance equation with psi frozen over the step."""
    params = params or OracleParams()
    guide = _Guidance(wf, params)
    X1, X2 = config.as_arrays()
    Y1, Y2 = _rk4(guide.velocity, X1, X2, dt)
    grid = wf.grid
    inside = (Y1 >= grid.x_min) & (Y1 < grid.x_max) & (Y2 >= grid.x_min) & (Y2 < grid.x_max)
    if not np.all(inside):
        raise DomainExitError("Bohmian configuration left the grid domain")
    if np.ndim(config.X1) == 0:
        return BohmianConfig(float(Y1[0]), float(Y2[0]))
    return BohmianConfig(Y1, Y2)


def born_sample(wf: Wavefunction2D, rng_seed, size: Optional[int] = None, jitter: bool = False) -> BohmianConfig:
    """Draw configurations from ``|psi|^2 dx^2`` by inverse CDF over the
    row-major flattened grid. ``jitter`` spreads draws uniformly over the cell."""
    rng = np.random.default_rng(rng_seed)
    p = (wf.density() * wf.grid.dx**2).ravel()
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    u = rng.random(1 if size is None else size)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    a, b = np.divmod(idx, wf.grid.n)
    x = wf.grid.x
    X1, X2 = x[a], x[b]
    if jitter:
        X1 = X1 + (rng.random(X1.shape) - 0.5) * wf.grid.dx
        X2 = X2 + (rng.random(X2.shape) - 0.5) * wf.grid.dx
    if size is None:
        return BohmianConfig(float(X1[0]), float(X2[0]))
    return BohmianConfig(X1, X2)


# -- diagnostics --------------------------------------------------------------


def schmidt_coefficients(wf: Wavefunction2D) -> np.ndarray:
    """Schmidt probabilities (sum to 1), descending."""
    s = np.linalg.svd(wf.amps * wf.grid.dx, compute_uv=False)
    p = s**2
    return p / p.sum()


def schmidt_entropy(wf: Wavefunction2D) -> float:
    p = schmidt_coefficients(wf)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def energy(wf: Wavefunction2D, v: np.ndarray, params: OracleParams) -> float:
    grid = wf.grid
    hat = np.fft.fft2(wf.amps)
    w = np.abs(hat) ** 2
    k2 = grid.k**2
    t = 0.0
    if params.kinetic:
        t_op = params.hbar**2 * (k2[:, None] / (2 * params.mass1) + k2[None, :] / (2 * params.mass2))
        t = float(np.sum(w * t_op) / np.sum(w))
    return t + float(np.sum(wf.density() * v) / np.sum(wf.density()))


# -- propagation --------------------------------------------------------------


@dataclass
class Sample:
    step: int
    t: float
    norm: float
    entropy: float
    X1: float
    X2: float
    energy: float


@dataclass
class Run:
    params: OracleParams
    initial: Wavefunction2D
    final: Wavefunction2D
    config: Optional[BohmianConfig]
    samples: List[Sample] = field(default_factory=list)
    sources: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])


def _kinetic_factor(k, mass, hbar, dt):
    return np.exp(-1j * hbar * k**2 / (2 * mass) * dt)


def _edge_mass(wf: Wavefunction2D) -> float:
    rho = wf.density() * wf.grid.dx**2
    inner = rho[2:-2, 2:-2].sum()
    return float(rho.sum() - inner)


def evolve(
    wf: Wavefunction2D,
    params: OracleParams,
    config0: Optional[BohmianConfig] = None,
    observers: Sequence[Callable] = (),
    sample_every: int = 1,
    record_sources: bool = False,
) -> Run:
    """Propagate ``params.steps`` Strang steps.

    Each step: half kinetic, full potential (rebuilt from the current psi
    and configuration), half kinetic. A configuration (or ensemble), if
    given, is moved by RK4 using the wavefunction at mid-step; it sources
    the potential only for NSB. ``observers`` are called
    as ``obs(sample, wf, config)`` at every sample.
    """
    model = params.model
    is_nsb = isinstance(model, NSB)
    if is_nsb and config0 is None:
        raise UsageError("the NSB model needs an initial BohmianConfig")
    if is_nsb and np.ndim(config0.X1) != 0:
        raise UsageError("the NSB potential is sourced by a single configuration, not an ensemble")
    grid = wf.grid
    params.softening(grid)
    psi = wf.amps.copy()
    config = config0
    dt = params.dt
    dx2 = grid.dx**2

    if params.kinetic:
        half = np.outer(
            _kinetic_factor(grid.k, params.mass1, params.hbar, dt / 2),
            _kinetic_factor(grid.k, params.mass2, params.hbar, dt / 2),
        )

    def kick(a):
        return np.fft.ifft2(half * np.fft.fft2(a)) if params.kinetic else a

    def build(current: Wavefunction2D, cfg):
        if isinstance(model, Newton):
            return potential_grid(model, current, cfg, params), None
        if isinstance(model, NS):
            src = current.marginals()
        elif is_nsb:
            src = BohmianConfig(float(cfg.X1), float(cfg.X2))
        else:
            src = None
        v1, v2 = potential_parts(model, current, cfg, params, sources=src)
        return v1[:, None] + v2[None, :], src

    run = Run(params, wf.copy(), wf, config)

    def take_sample(step, current, cfg, v):
        single = cfg is not None and np.ndim(cfg.X1) == 0
        x1 = float(cfg.X1) if single else float("nan")
        x2 = float(cfg.X2) if single else float("nan")
        s = Sample(step, step * dt, current.norm, schmidt_entropy(current), x1, x2, energy(current, v, params))
        run.samples.append(s)
        for obs in observers:
            obs(s, current, cfg)

    current = Wavefunction2D(psi, grid)
    v, _ = build(current, config)
    take_sample(0, current, config, v)
    norm_prev = current.norm
    for step in range(1, params.steps + 1):
        current = Wavefunction2D(psi, grid)
        v, src = build(current, config)
        if record_sources:
            run.sources.append(src)
        phase = np.exp(-1j * v * dt / params.hbar)
        psi = kick(psi)
        if config is not None and params.kinetic:
            mid = Wavefunction2D(psi * np.exp(-0.5j * v * dt / params.hbar), grid)
            try:
                config = step_bohmian(config, mid, dt, params)
            except StabilityError as exc:
                exc.step = step
                exc.args = (f"step {step}: {exc}",)
                raise
        psi = kick(psi * phase)
        current = Wavefunction2D(psi, grid)
        if not np.all(np.isfinite(psi)):
            raise StabilityError("non-finite amplitude", step)
        norm = current.norm
        if abs(norm - norm_prev) > NORM_DRIFT_PER_STEP:
            raise StabilityError(f"norm drift {abs(norm - norm_prev):.3e}; reduce dt", step)
        norm_prev = norm
        if _edge_mass(current) > BOUNDARY_MASS:
            raise StabilityError("probability reached the periodic boundary; enlarge the domain", step)
        if step % sample_every == 0 or step == params.steps:
            take_sample(step, current, config, build(current, config)[0])

    run.final = current
    run.config = config
    return run


def evolve_factor(psi0: np.ndarray, grid: Grid1D, potentials: Sequence[np.ndarray], mass: float, params: OracleParams) -> np.ndarray:
    """Single-particle Strang propagation through a given potential sequence."""
    psi = np.asarray(psi0, dtype=complex).copy()
    dt = params.dt
    half = _kinetic_factor(grid.k, mass, params.hbar, dt / 2)

    def kick(a):
        return np.fft.ifft(half * np.fft.fft(a)) if params.kinetic else a

    for v in potentials:
        psi = kick(kick(psi) * np.exp(-1j * v * dt / params.hbar))
    return psi


def split_product(wf: Wavefunction2D) -> Tuple[np.ndarray, np.ndarray]:
    """Factors ``(f1, f2)`` with ``f1 f2^T`` the best rank-1 approximation."""
    u, s, vh = np.linalg.svd(wf.amps)
    root = np.sqrt(s[0])
    return u[:, 0] * root, vh[0, :] * root


@dataclass
class DysonReport:
    l2_error: float
    max_entropy: float


def dyson_factorization_check(run: Run, params: Optional[OracleParams] = None) -> DysonReport:
    """Re-propagate each particle alone in the frozen fields of ``run``.

    The fields (marginals for NS, configuration for NSB) are read from the
    reference run step by step; the tensor product of the two
    independently propagated factors is compared with the full solution.
    """
    params = params or run.params
    model = params.model
    if not getattr(model, "separable", False) or isinstance(model, DGDiagonal):
        raise UsageError(f"{type(model).__name__} is not additively separable")
    if len(run.sources) != params.steps:
        raise UsageError("reference run must be produced with record_sources=True")
    grid = run.initial.grid
    f1, f2 = split_product(run.initial)
    v1s, v2s = [], []
    for src in run.sources:
        v1, v2 = potential_parts(model, run.initial, None, params, sources=src)
        v1s.append(v1)
        v2s.append(v2)
    f1 = evolve_factor(f1, grid, v1s, params.mass1, params)
    f2 = evolve_factor(f2, grid, v2s, params.mass2, params)
    diff = np.outer(f1, f2) - run.final.amps
    l2 = float(np.sqrt(np.sum(np.abs(diff) ** 2) * grid.dx**2))
    return DysonReport(l2, float(np.max(run.column("entropy"))))


def with_model(params: OracleParams, model) -> OracleParams:
    return replace(params, model=model)
