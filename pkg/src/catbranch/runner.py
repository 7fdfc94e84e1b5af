"""Orchestration of full runs and oracle verification; writes the CSV artifacts."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .classical import (
    BranchReport,
    CorrelationSummary,
    branching_metric,
    column_name,
    correlate,
    evolve_ensemble,
    time_average,
)
from .config import CONFIG_MARKER, SUMMARY_HEADER, RunConfig, decoupled_baseline, format_config
from .model import label_str
from .normal_modes import basis_for
from .reduced_density import ReducedSnapshot, interference_series, snapshots

log = logging.getLogger(__name__)


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass
class RunResult:
    snapshots: list[ReducedSnapshot]
    series: list[tuple[float, float]]
    baseline_series: list[tuple[float, float]]
    branch: BranchReport
    ensemble_times: np.ndarray
    x_sys: np.ndarray
    labels: list
    correlation: CorrelationSummary

    @property
    def retention(self) -> float:
        """Time-averaged i_max relative to the decoupled baseline."""
        return self.correlation.mean_i_max / time_average(*zip(*self.baseline_series))

    def crossing_retention(self) -> float:
        base = dict(self.baseline_series)
        rows = self.correlation.at_crossings
        if not rows:
            return float("nan")
        ours = np.mean([r.i_max for r in rows])
        ref = np.mean([base[r.crossing.t] for r in rows])
        return float(ours / ref)


def compute(rc: RunConfig) -> RunResult:
    cfg = rc.config
    basis = basis_for(cfg.network)
    ens = evolve_ensemble(cfg, basis, rc.classical_times())
    branch = branching_metric(ens)
    crossing_times = [c.t for c in branch.crossings]
    series_times = sorted(set(rc.series_times().tolist()) | set(crossing_times))

    log.info("evolving %d snapshot times and %d series times", len(rc.snapshot_times), len(series_times))
    snaps = snapshots(cfg, rc.snapshot_times, rc.grid, basis)
    series = interference_series(cfg, series_times, rc.grid, basis)
    base = decoupled_baseline(rc)
    baseline = interference_series(base.config, series_times, rc.grid)
    corr = correlate(branch, series)
    return RunResult(snaps, series, baseline, branch, ens.times, ens.x_sys, ens.labels, corr)


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def write_classical(out: Path, rc: RunConfig, times, x_sys, labels, branch: BranchReport, corr=None):
    sys = rc.network.system_index
    _write_csv(
        out / "classical.csv",
        ["t"] + [column_name(lab, sys) for lab in labels],
        ([t] + list(x_sys[:, i]) for i, t in enumerate(times)),
    )
    _write_csv(
        out / "branching.csv",
        ["t", "B", "diameter_g0", "diameter_g1", "rms_spread", "min_diameter"],
        zip(branch.times, branch.B, branch.diameters[0], branch.diameters[1], branch.rms, branch.min_diameter),
    )
    if corr is None:
        _write_csv(
            out / "crossings.csv",
            ["t_star", "label_j", "label_k", "B_at_t"],
            (
                [c.t, label_str(c.j), label_str(c.k), float(np.interp(c.t, branch.times, branch.B))]
                for c in branch.crossings
            ),
        )
    else:
        _write_csv(
            out / "crossings.csv",
            ["t_star", "label_j", "label_k", "i_max_at_t", "B_at_t"],
            ([r.crossing.t, label_str(r.crossing.j), label_str(r.crossing.k), r.i_max, r.B] for r in corr.at_crossings),
        )


def summary_text(rc: RunConfig, res: RunResult) -> str:
    corr = res.correlation
    at = corr.at_crossings
    lines = [
        SUMMARY_HEADER,
        f"version: {__version__}",
        f"preset: {rc.preset or '-'}",
        f"particles: {rc.network.n}",
        f"system_particle: {rc.network.system_index + 1}",
        f"mean_i_max: {fmt(corr.mean_i_max)}",
        f"baseline_mean_i_max: {fmt(time_average(*zip(*res.baseline_series)))}",
        f"interference_retention: {fmt(res.retention)}",
        f"mean_B: {fmt(corr.mean_B)}",
        f"crossing_count: {len(at)}",
        f"mean_i_max_at_crossings: {fmt(np.mean([r.i_max for r in at])) if at else 'nan'}",
        f"mean_B_at_crossings: {fmt(np.mean([r.B for r in at])) if at else 'nan'}",
        f"crossing_interference_retention: {fmt(res.crossing_retention())}",
        f"max_norm_drift: {fmt(norm_drift(res.snapshots))}",
        CONFIG_MARKER,
        format_config(rc),
    ]
    return "\n".join(lines)


def norm_drift(snaps: list[ReducedSnapshot]) -> float:
    norms = np.array([s.norm for s in snaps])
    if norms.size == 0:
        return 0.0
    return float(np.max(np.abs(norms - norms[0])) / abs(norms[0]))


def run(rc: RunConfig, out_dir=None) -> RunResult:
    out = Path(out_dir or rc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = compute(rc)
    xname = f"x{rc.network.system_index + 1}"
    _write_csv(
        out / "snapshots.csv",
        ["t", xname, "rho", "interference"],
        ([s.t, x, r, i] for s in res.snapshots for x, r, i in zip(s.grid.x, s.rho, s.interference)),
    )
    _write_csv(out / "imax.csv", ["t", "i_max"], res.series)
    write_classical(out, rc, res.ensemble_times, res.x_sys, res.labels, res.branch, res.correlation)
    (out / "summary.txt").write_text(summary_text(rc, res))
    return res


def run_classical(rc: RunConfig, out_dir=None) -> BranchReport:
    out = Path(out_dir or rc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ens = evolve_ensemble(rc.config, None, rc.classical_times())
    branch = branching_metric(ens)
    write_classical(out, rc, ens.times, ens.x_sys, ens.labels, branch)
    return branch


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<34} {self.value:.3e} (tol {self.tol:.0e})"


def verify(rc: RunConfig, grid3d: bool = False, report: Callable[[Check], None] | None = None) -> list[Check]:
    """Run every oracle cross-check for ``rc``; slow by design."""
    from . import checks

    out = []
    for fn in checks.all_checks(grid3d):
        chk = fn(rc)
        out.append(chk)
        if report:
            report(chk)
    return out
