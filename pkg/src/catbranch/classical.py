"""Classical trajectory ensemble of the system coordinate, crossings and branching."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyInput
from .model import PacketLabel, ValidatedConfig, all_labels, label_str
from .normal_modes import NormalModeBasis, basis_for

CROSSING_TOL = 1e-9
DEDUP_TOL = 1e-6
DEGENERATE_ATOL = 1e-12


@dataclass(frozen=True)
class TrajectoryEnsemble:
    labels: list[PacketLabel]
    times: np.ndarray
    x_sys: np.ndarray
    system_index: int
    x0: np.ndarray = field(repr=False)
    """Initial particle positions per label, shape ``(2^n, n)``."""
    basis: NormalModeBasis = field(repr=False)

    def group(self, j: int) -> int:
        return self.labels[j][self.system_index]

    def position(self, j: int, t) -> np.ndarray:
        """System coordinate of trajectory ``j`` at arbitrary time(s)."""
        return _positions(self.basis, self.x0[j : j + 1], np.atleast_1d(t))[0, :, self.system_index]


@dataclass(frozen=True)
class Crossing:
    t: float
    j: PacketLabel
    k: PacketLabel


@dataclass(frozen=True)
class BranchReport:
    times: np.ndarray
    B: np.ndarray
    diameters: np.ndarray
    """Within-group diameters, shape ``(2, len(times))``."""
    rms: np.ndarray
    min_diameter: np.ndarray
    crossings: list[Crossing]

    @property
    def mean_B(self) -> float:
        return time_average(self.times, self.B)

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)


@dataclass(frozen=True)
class CrossingCorrelation:
    crossing: Crossing
    i_max: float
    B: float


@dataclass(frozen=True)
class CorrelationSummary:
    at_crossings: list[CrossingCorrelation]
    mean_B: float
    mean_i_max: float


def time_average(times, values) -> float:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 2 or times[-1] == times[0]:
        return float(values.mean()) if len(values) else float("nan")
    return float(np.trapezoid(values, times) / (times[-1] - times[0]))


def _positions(basis: NormalModeBasis, x0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Zero-velocity normal-mode solution, shape ``(labels, times, n)``."""
    q0 = x0 @ basis.to_mode_matrix.T
    omega = np.where(basis.free_mode, 0.0, basis.omega)
    phase = np.cos(np.outer(times, omega))
    q = q0[:, None, :] * phase[None, :, :]
    x = q @ basis.from_mode_matrix.T
    x[:, times == 0.0, :] = x0[:, None, :]
    return x


def _velocities(basis: NormalModeBasis, x0: np.ndarray, times: np.ndarray) -> np.ndarray:
    q0 = x0 @ basis.to_mode_matrix.T
    omega = np.where(basis.free_mode, 0.0, basis.omega)
    rate = -omega[None, :] * np.sin(np.outer(times, omega))
    return (q0[:, None, :] * rate[None, :, :]) @ basis.from_mode_matrix.T


def phase_space(ens: "TrajectoryEnsemble") -> tuple[np.ndarray, np.ndarray]:
    """All particle positions and velocities, each ``(labels, times, n)``."""
    return _positions(ens.basis, ens.x0, ens.times), _velocities(ens.basis, ens.x0, ens.times)


def initial_positions(config: ValidatedConfig, labels: Sequence[PacketLabel]) -> np.ndarray:
    return np.asarray(labels, dtype=float) * np.asarray(config.cat.d)[None, :]


def evolve_ensemble(
    config: ValidatedConfig, basis: NormalModeBasis | None, times
) -> TrajectoryEnsemble:
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and sorted")
    basis = basis or basis_for(config.network)
    labels = all_labels(config.n)
    x0 = initial_positions(config, labels)
    x = _positions(basis, x0, times)[:, :, config.system_index]
    return TrajectoryEnsemble(labels, times, x, config.system_index, x0, basis)


def branching_metric(ens: TrajectoryEnsemble) -> BranchReport:
    """Within-group spread of trajectories sharing the system's initial packet."""
    groups = np.array([ens.group(j) for j in range(len(ens.labels))])
    diam, rms = [], []
    for g in (0, 1):
        xs = ens.x_sys[groups == g]
        diam.append(xs.max(axis=0) - xs.min(axis=0))
        rms.append(xs.std(axis=0))
    diam = np.array(diam)
    return BranchReport(
        ens.times,
        diam.mean(axis=0),
        diam,
        np.mean(rms, axis=0),
        diam.min(axis=0),
        find_crossings(ens),
    )


def _bisect(f, lo, hi, flo):
    while hi - lo > CROSSING_TOL:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_crossings(ens: TrajectoryEnsemble) -> list[Crossing]:
    """Sign changes of ``x_j - x_k`` for trajectories from different system packets.

    Tangential touches that do not change sign between samples are missed.
    """
    out: list[Crossing] = []
    m = len(ens.labels)
    t = ens.times
    scale = max(np.abs(ens.x_sys).max(), 1.0) if ens.x_sys.size else 1.0
    for j in range(m):
        for k in range(j + 1, m):
            if ens.group(j) == ens.group(k):
                continue
            diff = ens.x_sys[j] - ens.x_sys[k]
            if np.max(np.abs(diff)) <= DEGENERATE_ATOL * scale:
                continue

            def f(s, j=j, k=k):
                return float(ens.position(j, s)[0] - ens.position(k, s)[0])

            roots = [float(t[i]) for i in np.flatnonzero(diff == 0.0)]
            for i in np.flatnonzero(diff[:-1] * diff[1:] < 0):
                roots.append(_bisect(f, t[i], t[i + 1], diff[i]))
            roots.sort()
            kept: list[float] = []
            for r in roots:
                if not kept or r - kept[-1] > DEDUP_TOL:
                    kept.append(r)
            out.extend(Crossing(r, ens.labels[j], ens.labels[k]) for r in kept)
    out.sort(key=lambda c: (c.t, c.j, c.k))
    return out


def correlate(report: BranchReport, series: Sequence[tuple[float, float]]) -> CorrelationSummary:
    """Interference and branching at each cross-group crossing, plus time averages."""
    if not len(series) or not len(report.times):
        raise EmptyInput("correlation needs a non-empty interference series and branch report")
    ts = np.array([s[0] for s in series], dtype=float)
    im = np.array([s[1] for s in series], dtype=float)
    rows = [
        CrossingCorrelation(
            c,
            float(np.interp(c.t, ts, im)),
            float(np.interp(c.t, report.times, report.B)),
        )
        for c in report.crossings
    ]
    return CorrelationSummary(rows, report.mean_B, time_average(ts, im))


def column_name(label: PacketLabel, system_index: int) -> str:
    return f"x{system_index + 1}_{label_str(label)}"
