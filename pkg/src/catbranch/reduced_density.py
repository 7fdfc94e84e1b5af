"""Reduced density of the system particle and its interference part."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridTooNarrow, NotNormalizable
from .gaussian import ComplexGaussianTerm, LabeledTerm, conjugate, integrate_all, marginalize, stack
from .model import ValidatedConfig
from .normal_modes import NormalModeBasis, basis_for
from .propagation import build_initial_terms, evolve_terms

BOUNDARY_RTOL = 1e-8


@dataclass(frozen=True)
class Grid:
    x_min: float = -12.0
    x_max: float = 12.0
    count: int = 1201

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.count)


@dataclass(frozen=True)
class ReducedSnapshot:
    t: float
    grid: Grid
    rho: np.ndarray
    interference: np.ndarray
    i_max: float
    norm: float
    """Analytic integral of the unnormalized reduced density."""
    z: float
    """Trapezoidal normalization constant actually divided out."""


def _pair_batch(wave: ComplexGaussianTerm) -> ComplexGaussianTerm:
    """All ``conj(G_j) * G_k`` as a ``(J, K)`` batch."""
    bra = conjugate(wave)
    return ComplexGaussianTerm(
        bra.c[:, None] + wave.c[None, :],
        bra.b[:, None] + wave.b[None, :],
        bra.A[:, None] + wave.A[None, :],
    )


def density_pair_terms(wave_terms: Sequence[LabeledTerm]) -> list[LabeledTerm]:
    """The ``4^n`` terms of ``|Psi|^2``, row-major over (bra, ket)."""
    pairs = _pair_batch(stack(lt.term for lt in wave_terms))
    out = []
    for j, bra in enumerate(wave_terms):
        for k, ket in enumerate(wave_terms):
            out.append(LabeledTerm(pairs[j, k], ket.ket, bra.ket))
    return out


def reduce(pair_terms: Sequence[LabeledTerm], system_index: int) -> list[LabeledTerm]:
    """Integrate every pair term over all coordinates except ``system_index``."""
    if not pair_terms:
        return []
    batch = stack(lt.term for lt in pair_terms)
    drop = [i for i in range(batch.dim) if i != system_index]
    try:
        reduced = marginalize(batch, drop)
    except NotNormalizable:
        for lt in pair_terms:
            try:
                marginalize(lt.term, drop)
            except NotNormalizable as exc:
                raise NotNormalizable(f"pair term bra={lt.bra} ket={lt.ket}: {exc}") from exc
        raise
    return [LabeledTerm(reduced[i], lt.ket, lt.bra) for i, lt in enumerate(pair_terms)]


def is_interference(lt: LabeledTerm, system_index: int) -> bool:
    return lt.bra[system_index] != lt.ket[system_index]


def split_interference(
    reduced: Sequence[LabeledTerm], system_index: int
) -> tuple[list[LabeledTerm], list[LabeledTerm]]:
    diag, cross = [], []
    for lt in reduced:
        (cross if is_interference(lt, system_index) else diag).append(lt)
    return diag, cross


def evaluate_1d(terms: ComplexGaussianTerm, x: np.ndarray) -> np.ndarray:
    """Sum of a batch of one-variable terms on a grid, in fixed term order."""
    if len(terms.batch_shape) == 0:
        terms = terms[None]
    z = terms.c[:, None] + terms.b[:, 0, None] * x[None, :] - 0.5 * terms.A[:, 0, 0, None] * x[None, :] ** 2
    z = np.clip(z.real, -700.0, 700.0) + 1j * z.imag
    vals = np.exp(z)
    total = np.zeros(x.shape, dtype=complex)
    for row in vals:
        total += row
    return total


def reduced_terms_at(
    config: ValidatedConfig, basis: NormalModeBasis, t: float
) -> tuple[ComplexGaussianTerm, np.ndarray]:
    """Reduced one-variable terms as a flat batch plus a boolean interference mask."""
    init = build_initial_terms(config)
    wave = evolve_terms(stack(lt.term for lt in init), basis, config.cat.hbar, t)
    labels = [lt.ket for lt in init]
    pairs = _pair_batch(wave)
    m = len(labels)
    flat = ComplexGaussianTerm(
        pairs.c.reshape(m * m), pairs.b.reshape(m * m, -1), pairs.A.reshape((m * m,) + pairs.A.shape[-2:])
    )
    sys = config.system_index
    drop = [i for i in range(config.n) if i != sys]
    try:
        reduced = marginalize(flat, drop)
    except NotNormalizable as exc:
        raise NotNormalizable(f"t={t}: {exc}") from exc
    mask = np.array([labels[j][sys] != labels[k][sys] for j in range(m) for k in range(m)])
    return reduced, mask


def snapshot(
    config: ValidatedConfig, basis: NormalModeBasis | None, t: float, grid: Grid = Grid()
) -> ReducedSnapshot:
    if t < 0:
        raise ValueError(f"negative time {t}")
    basis = basis or basis_for(config.network)
    reduced, mask = reduced_terms_at(config, basis, t)
    x = grid.x
    diag = evaluate_1d(reduced[~mask], x).real
    cross = evaluate_1d(reduced[mask], x).real
    total = diag + cross
    peak = np.max(np.abs(total))
    edge = max(abs(total[0]), abs(total[-1]))
    if not peak > 0 or edge >= BOUNDARY_RTOL * peak:
        raise GridTooNarrow(
            f"t={t}: boundary density {edge:.3g} vs peak {peak:.3g} on [{grid.x_min}, {grid.x_max}]"
        )
    z = float(np.trapezoid(total, x))
    norm = float(np.sum(integrate_all(reduced)).real)
    rho = total / z
    interference = cross / z
    return ReducedSnapshot(
        float(t), grid, rho, interference, float(np.max(np.abs(interference))), norm, z
    )


def _threads() -> int:
    import os

    try:
        return max(1, int(os.environ.get("CATBRANCH_THREADS", "") or os.cpu_count() or 1))
    except ValueError:
        return 1


def snapshots(
    config: ValidatedConfig, times: Sequence[float], grid: Grid = Grid(), basis=None
) -> list[ReducedSnapshot]:
    basis = basis or basis_for(config.network)
    times = sorted(float(t) for t in times)
    workers = min(_threads(), max(1, len(times)))
    if workers == 1:
        return [snapshot(config, basis, t, grid) for t in times]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda t: snapshot(config, basis, t, grid), times))


def interference_series(
    config: ValidatedConfig, times: Sequence[float], grid: Grid = Grid(), basis=None
) -> list[tuple[float, float]]:
    return [(s.t, s.i_max) for s in snapshots(config, times, grid, basis)]
