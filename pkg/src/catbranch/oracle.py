"""Brute-force verifiers: tensor Simpson quadrature, split-operator grids, RK4.

Nothing here shares code with the analytic pipeline beyond term evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft

from .errors import BoundaryMassTooLarge, DimensionMismatch, ResolutionTooCoarse
from .gaussian import ComplexGaussianTerm, log_evaluate
from .model import PacketLabel, ValidatedConfig

BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    """Per-axis ``(lo, hi, points)``; point counts must be odd."""

    axes: tuple[tuple[float, float, int], ...]

    def __post_init__(self):
        for lo, hi, npts in self.axes:
            if npts < 3 or npts % 2 == 0:
                raise ValueError(f"Simpson needs an odd point count >= 3, got {npts}")
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise ValueError(f"bad interval [{lo}, {hi}]")

    @classmethod
    def uniform(cls, dim: int, lo: float, hi: float, points: int) -> "QuadratureSpec":
        return cls(((lo, hi, points),) * dim)

    def nodes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, n) for lo, hi, n in self.axes]


def simpson_weights(lo: float, hi: float, npts: int) -> np.ndarray:
    h = (hi - lo) / (npts - 1)
    w = np.ones(npts)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def _mesh_values(term: ComplexGaussianTerm, spec: QuadratureSpec) -> np.ndarray:
    nodes = spec.nodes()
    mesh = np.stack(np.meshgrid(*nodes, indexing="ij"), axis=-1)
    return np.exp(log_evaluate(term, mesh))


def quad_integrate(term: ComplexGaussianTerm, spec: QuadratureSpec) -> complex:
    """Composite-Simpson tensor-product integral of a single term."""
    if len(spec.axes) != term.dim:
        raise DimensionMismatch(f"{len(spec.axes)} axes for a {term.dim}-dimensional term")
    vals = _mesh_values(term, spec)
    mag = np.abs(vals)
    peak = mag.max()
    edge = 0.0
    for ax in range(vals.ndim):
        edge = max(edge, np.take(mag, 0, axis=ax).max(), np.take(mag, -1, axis=ax).max())
    if edge > BOUNDARY_RTOL * peak:
        raise BoundaryMassTooLarge(f"boundary value {edge:.3g} vs peak {peak:.3g}")
    out = vals
    for lo, hi, npts in reversed(spec.axes):
        out = out @ simpson_weights(lo, hi, npts)
    return complex(out)


def condition(term: ComplexGaussianTerm, index: int, value: float) -> ComplexGaussianTerm:
    """Fix one variable to ``value``, leaving a term over the others."""
    n = term.dim
    rest = [i for i in range(n) if i != index]
    A, b = term.A, term.b
    c = term.c + b[..., index] * value - 0.5 * A[..., index, index] * value**2
    b_new = b[..., rest] - A[..., rest, index] * value
    return ComplexGaussianTerm(c, b_new, A[(...,) + np.ix_(rest, rest)])


def quad_marginal(
    term: ComplexGaussianTerm, keep: int, x_keep: Sequence[float], spec: QuadratureSpec
) -> np.ndarray:
    """Integrate over all variables but ``keep`` for each value in ``x_keep``."""
    return np.array([quad_integrate(condition(term, keep, float(x)), spec) for x in x_keep])


# --- split-operator grid evolution -------------------------------------------------


def _wavenumbers(x: np.ndarray) -> np.ndarray:
    dx = x[1] - x[0]
    return 2.0 * np.pi * np.fft.fftfreq(len(x), d=dx)


def grid_evolve(
    psi0: np.ndarray,
    axes: Sequence[np.ndarray],
    potential: np.ndarray,
    masses: Sequence[float],
    t: float,
    steps: int,
    hbar: float = 1.0,
    spectral_rtol: float = 1e-10,
) -> np.ndarray:
    """Strang-split evolution with the kinetic step applied in Fourier space.

    The grid must resolve the state: the kinetic phase per step at the
    largest wavenumber carrying spectral weight above ``spectral_rtol`` must
    stay below pi/4, and the outer 10% of each Fourier axis must be empty.
    """
    psi = np.asarray(psi0, dtype=complex)
    if psi.ndim != len(axes) or psi.ndim > 3 or len(masses) != psi.ndim:
        raise DimensionMismatch("wavefunction, axes and masses disagree (at most 3 dimensions)")
    if potential.shape != psi.shape:
        raise DimensionMismatch("potential must be sampled on the same grid")
    if steps < 1:
        raise ValueError("steps must be positive")
    dt = t / steps
    ks = [_wavenumbers(np.asarray(x)) for x in axes]

    _check_resolution(psi, ks, masses, dt, hbar, spectral_rtol)

    kin = np.zeros(psi.shape)
    for ax, (k, m) in enumerate(zip(ks, masses)):
        shape = [1] * psi.ndim
        shape[ax] = len(k)
        kin = kin + (hbar * k**2 / (2.0 * m)).reshape(shape)
    kin_phase = np.exp(-1j * dt * kin)
    half_pot = np.exp(-0.5j * dt * potential / hbar)

    psi = psi * half_pot
    for step in range(steps):
        psi = scipy.fft.ifftn(scipy.fft.fftn(psi) * kin_phase)
        psi = psi * (half_pot if step == steps - 1 else half_pot * half_pot)
    return psi


def _check_resolution(psi, ks, masses, dt, hbar, rtol):
    spec = np.abs(scipy.fft.fftn(psi)) ** 2
    peak = spec.max()
    for ax, (k, m) in enumerate(zip(ks, masses)):
        other = tuple(i for i in range(psi.ndim) if i != ax)
        profile = spec.max(axis=other) if other else spec
        occupied = np.abs(k)[profile > rtol * peak]
        kmax = np.abs(k).max()
        if occupied.size and occupied.max() > 0.9 * kmax:
            raise ResolutionTooCoarse(f"axis {ax}: state reaches the Nyquist wavenumber")
        if occupied.size and hbar * occupied.max() ** 2 / (2.0 * m) * dt >= np.pi / 4:
            raise ResolutionTooCoarse(f"axis {ax}: kinetic phase per step exceeds pi/4")


def harmonic_potential(axes: Sequence[np.ndarray], V: np.ndarray) -> np.ndarray:
    """``1/2 x.V.x`` sampled on the tensor grid."""
    mesh = np.meshgrid(*axes, indexing="ij")
    out = np.zeros(mesh[0].shape)
    for i in range(len(axes)):
        for j in range(len(axes)):
            if V[i, j] != 0:
                out += 0.5 * V[i, j] * mesh[i] * mesh[j]
    return out


def cat_on_grid(axes: Sequence[np.ndarray], d: Sequence[float], sigma: Sequence[float]) -> np.ndarray:
    """Unnormalized product of per-particle cat states, straight from the formula."""
    psi = np.ones(())
    for x, di, si in zip(axes, d, sigma):
        f = np.exp(-(x**2) / (4 * si**2)) + np.exp(-((x - di) ** 2) / (4 * si**2))
        psi = np.multiply.outer(psi, f)
    return psi


# --- classical RK4 -----------------------------------------------------------------


def rk4_trajectories(
    config: ValidatedConfig, labels: Sequence[PacketLabel], dt: float, t_end: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate ``x'' = -M^{-1} V x`` from rest at the labelled packet centres.

    Returns ``(times, positions, velocities)``; positions and velocities have
    shape ``(labels, times, n)``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    V = config.potential
    minv = 1.0 / np.asarray(config.network.masses)
    steps = int(round(t_end / dt))
    times = np.arange(steps + 1) * dt
    x = np.asarray(labels, dtype=float) * np.asarray(config.cat.d)[None, :]
    v = np.zeros_like(x)

    def acc(pos):
        return -(pos @ V) * minv

    xs = np.empty((len(labels), steps + 1, x.shape[1]))
    vs = np.empty_like(xs)
    xs[:, 0], vs[:, 0] = x, v
    for i in range(steps):
        k1x, k1v = v, acc(x)
        k2x, k2v = v + 0.5 * dt * k1v, acc(x + 0.5 * dt * k1x)
        k3x, k3v = v + 0.5 * dt * k2v, acc(x + 0.5 * dt * k2x)
        k4x, k4v = v + dt * k3v, acc(x + dt * k3x)
        x = x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        xs[:, i + 1], vs[:, i + 1] = x, v
    return times, xs, vs


def classical_energy(config: ValidatedConfig, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    m = np.asarray(config.network.masses)
    kinetic = 0.5 * np.sum(m * v**2, axis=-1)
    potential = 0.5 * np.einsum("...i,ij,...j->...", x, config.potential, x)
    return kinetic + potential


