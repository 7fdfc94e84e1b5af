"""Exact time evolution of Gaussian wavefunction terms in a harmonic network.

Each term ``exp(c + b.q - 1/2 q.A.q)`` in mode coordinates is written as
``exp(i/hbar [1/2 q.C.q + eta.q + gamma])`` with ``C = i hbar A``.  Under the
mode Hamiltonian the width matrix follows ``C(t) = P Q^{-1}`` where
``(Q, P)`` is the image of ``(I, C0)`` under the mode-diagonal symplectic
map; ``Q`` stays invertible for normalizable input, so there are no caustic
singularities to special-case.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NotNormalizable
from .gaussian import ComplexGaussianTerm, LabeledTerm, stack
from .model import ValidatedConfig, all_labels
from .normal_modes import NormalModeBasis

SERIES_THRESHOLD = 1e-6
CAUSTIC_TOL = 1e-8
MAX_PHASE_STEP = np.pi / 4


@dataclass(frozen=True)
class ModeKernel:
    omega: float
    hbar: float
    t: float
    mass: float = 1.0

    @property
    def regime(self) -> str:
        if self.omega == 0.0:
            return "free"
        if abs(np.sin(self.omega * self.t)) < CAUSTIC_TOL:
            return "near-caustic"
        return "oscillator"

    @property
    def cos(self) -> float:
        wt = self.omega * self.t
        if abs(wt) < SERIES_THRESHOLD:
            return 1.0 - wt**2 / 2 + wt**4 / 24
        return float(np.cos(wt))

    @property
    def sin_over_omega(self) -> float:
        wt = self.omega * self.t
        if abs(wt) < SERIES_THRESHOLD:
            return self.t * (1.0 - wt**2 / 6 + wt**4 / 120)
        return float(np.sin(wt) / self.omega)

    @property
    def minus_omega_sin(self) -> float:
        return -self.omega**2 * self.sin_over_omega


def mode_kernels(basis: NormalModeBasis, hbar: float, t: float) -> list[ModeKernel]:
    if t < 0:
        raise ValueError(f"negative time {t}")
    return [
        ModeKernel(0.0 if free else float(w), hbar, float(t))
        for w, free in zip(basis.omega, basis.free_mode)
    ]


def build_initial_terms(config: ValidatedConfig) -> list[LabeledTerm]:
    """The ``2^n`` product packets of the initial cat state (amplitudes unnormalized)."""
    sigma = np.asarray(config.cat.sigma)
    d = np.asarray(config.cat.d)
    inv = 1.0 / (4.0 * sigma**2)
    A = np.diag(2.0 * inv)
    out = []
    for label in all_labels(config.n):
        mu = np.asarray(label) * d
        out.append(LabeledTerm(ComplexGaussianTerm(-np.sum(inv * mu**2), 2.0 * inv * mu, A), label))
    return out


def _symplectic_blocks(kernels: Sequence[ModeKernel]):
    cos = np.array([k.cos for k in kernels])
    sinw = np.array([k.sin_over_omega for k in kernels])
    msin = np.array([k.minus_omega_sin for k in kernels])
    return cos, sinw, msin


def _trig_blocks(omega, ts):
    """Vectorized ``cos(w s)`` and ``sin(w s)/w`` on a grid of times (shape ``(S, n)``)."""
    wt = np.outer(ts, omega)
    small = np.abs(wt) < SERIES_THRESHOLD
    with np.errstate(divide="ignore", invalid="ignore"):
        sinw = np.where(small, 0.0, np.sin(wt) / np.where(omega == 0, 1.0, omega))
    sinw = np.where(small, ts[:, None] * (1.0 - wt**2 / 6 + wt**4 / 120), sinw)
    cos = np.where(small, 1.0 - wt**2 / 2 + wt**4 / 24, np.cos(wt))
    return cos, sinw


def _continuous_log_det(C0, omega, t) -> np.ndarray:
    """``log det Q(t)`` continued from ``log det Q(0) = 0`` along ``[0, t]``."""
    wmax = float(np.max(omega)) if len(omega) else 0.0
    samples = max(16, int(np.ceil(8 * wmax * t / np.pi)) + 1)
    while True:
        ts = np.linspace(0.0, t, samples + 1)
        cos, sinw = _trig_blocks(omega, ts)
        # Q(s) for every sample time and batch element: (S, batch..., n, n)
        Q = cos[(slice(None),) + (None,) * (C0.ndim - 2) + (slice(None), None)] * np.eye(len(omega))
        Q = Q + sinw[(slice(None),) + (None,) * (C0.ndim - 2) + (slice(None), None)] * C0
        dets = np.linalg.det(Q)
        if np.any(dets == 0):
            raise NotNormalizable("width matrix became singular during evolution")
        steps = np.angle(dets[1:] / dets[:-1])
        if np.all(np.abs(steps) < MAX_PHASE_STEP) or samples > 2**16:
            break
        samples *= 4
    return np.log(np.abs(dets[-1])) + 1j * np.sum(steps, axis=0)


def propagate_term(
    term: ComplexGaussianTerm, kernels: Sequence[ModeKernel]
) -> ComplexGaussianTerm:
    """Evolve a (batch of) term(s) given in mode coordinates."""
    n = term.dim
    if len(kernels) != n:
        raise ValueError(f"{len(kernels)} kernels for a {n}-mode term")
    hbar = kernels[0].hbar
    t = kernels[0].t
    re = 0.5 * (term.A.real + np.swapaxes(term.A.real, -1, -2))
    if np.min(np.linalg.eigvalsh(re)) <= 0:
        raise NotNormalizable("wavefunction term is not normalizable")
    if t == 0.0:
        return term

    cos, sinw, msin = _symplectic_blocks(kernels)
    C0 = 1j * hbar * term.A
    eta0 = -1j * hbar * term.b
    gamma0 = -1j * hbar * term.c

    Q = np.diag(cos) + sinw[:, None] * C0
    P = np.diag(msin) + cos[:, None] * C0
    # C = P Q^{-1} = (Q^{-T} P^T)^T; both C and Q^T P are symmetric
    Ct = np.swapaxes(np.linalg.solve(np.swapaxes(Q, -1, -2), np.swapaxes(P, -1, -2)), -1, -2)
    Ct = 0.5 * (Ct + np.swapaxes(Ct, -1, -2))

    # complex classical centre started at q=0 with momentum eta0
    qbar = sinw * eta0
    pbar = cos * eta0
    eta = pbar - np.einsum("...ij,...j->...i", Ct, qbar)
    omega = np.array([k.omega for k in kernels])
    logdet = _continuous_log_det(C0, omega, t)
    gamma = (
        gamma0
        + 0.5 * np.einsum("...i,...ij,...j->...", qbar, Ct, qbar)
        - 0.5 * np.einsum("...i,...i->...", pbar, qbar)
        + 0.5j * hbar * logdet
    )
    return ComplexGaussianTerm(1j * gamma / hbar, 1j * eta / hbar, -1j * Ct / hbar)


def to_mode_term(term: ComplexGaussianTerm, basis: NormalModeBasis) -> ComplexGaussianTerm:
    T = basis.from_mode_matrix
    return ComplexGaussianTerm(term.c, term.b @ T, T.T @ term.A @ T)


def from_mode_term(term: ComplexGaussianTerm, basis: NormalModeBasis) -> ComplexGaussianTerm:
    S = basis.to_mode_matrix
    return ComplexGaussianTerm(term.c, term.b @ S, S.T @ term.A @ S)


def evolve_terms(
    terms: ComplexGaussianTerm, basis: NormalModeBasis, hbar: float, t: float
) -> ComplexGaussianTerm:
    """Batch evolution in particle coordinates, single shot from time 0 to ``t``."""
    kernels = mode_kernels(basis, hbar, t)
    return from_mode_term(propagate_term(to_mode_term(terms, basis), kernels), basis)


def evolve_state(
    initial: Sequence[LabeledTerm], basis: NormalModeBasis, t: float, hbar: float = 1.0
) -> list[LabeledTerm]:
    batch = stack(lt.term for lt in initial)
    evolved = evolve_terms(batch, basis, hbar, t)
    return [LabeledTerm(evolved[i], lt.ket, lt.bra) for i, lt in enumerate(initial)]
