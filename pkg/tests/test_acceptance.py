"""Exit criteria for the simulator, one test per criterion."""
import filecmp
import time

import numpy as np
import pytest

from catbranch import checks
from catbranch.config import preset_config
from catbranch.normal_modes import basis_for
from catbranch.reduced_density import interference_series, snapshots
from catbranch.runner import compute, norm_drift, run


@pytest.fixture(scope="module")
def results():
    out = {}
    for name in ("weak", "strong", "decoupled"):
        start = time.perf_counter()
        out[name] = compute(preset_config(name))
        out[name + "_seconds"] = time.perf_counter() - start
    return out


def test_1_unitarity_and_runtime(results, record, tmp_path):
    drifts = {}
    for name in ("weak", "strong"):
        rc = preset_config(name)
        snaps = snapshots(rc.config, (0.0,) + rc.snapshot_times, rc.grid)
        drifts[name] = norm_drift(snaps)
    start = time.perf_counter()
    run(preset_config("strong"), tmp_path)
    seconds = time.perf_counter() - start
    ok = max(drifts.values()) <= 1e-8 and seconds <= 10.0
    record(1, "norm drift <= 1e-8, full run <= 10 s", ok,
           f"drift weak {drifts['weak']:.1e}, strong {drifts['strong']:.1e}; run {seconds:.2f} s")
    assert ok


def test_2_ehrenfest(record):
    errs = {name: checks.ehrenfest_error(preset_config(name)) for name in ("weak", "strong")}
    ok = max(errs.values()) <= 1e-8
    record(2, "diagonal centroids = classical trajectories to 1e-8", ok,
           ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))
    assert ok


def test_3_gaussian_oracle(record):
    err = checks.gaussian_quadrature_error(count=24)
    ok = err <= 1e-6
    record(3, "marginalize/integrate_all vs Simpson on 24 random complex terms", ok, f"max rel err {err:.1e}")
    assert ok


def test_4_dynamics_oracles(record):
    grid_err = checks.grid_cat_error(1.5, 2.5, -5.0, 0.5)
    rk4 = max(checks.rk4_error(preset_config(name))[0] for name in ("weak", "strong"))
    ok = grid_err <= 1e-6 and rk4 <= 1e-6
    record(4, "1-D cat vs split-operator <= 1e-6; analytic vs RK4 <= 1e-6", ok,
           f"grid {grid_err:.1e}, RK4 {rk4:.1e}")
    assert ok


def test_5_closed_system_control(record):
    rc = preset_config("decoupled")
    m1, k1 = rc.network.masses[0], rc.network.external_k[0]
    period = 2 * np.pi * np.sqrt(m1 / k1)
    basis = basis_for(rc.network)
    sys_modes = [a for a in range(3) if abs(basis.O[0, a]) > 1e-12]
    mode_period = 2 * np.pi / basis.omega[sys_modes[0]]
    ts = np.linspace(0.0, period, 41)
    laps = [dict(interference_series(rc.config, ts + lap * period)) for lap in range(4)]
    worst = 0.0
    for lap in range(1, 4):
        a = np.array(list(laps[lap - 1].values()))
        b = np.array(list(laps[lap].values()))
        worst = max(worst, np.max(np.abs(b - a)))
    ok = len(sys_modes) == 1 and abs(mode_period - period) <= 1e-6 and worst <= 1e-8
    record(5, "decoupled i_max periodic with 2 pi sqrt(m1/K), 3 periods", ok,
           f"period error {abs(mode_period - period):.1e}, max |i(t+T)-i(t)| {worst:.1e}")
    assert ok


def _matching_weak_crossing(weak_rows, row):
    same_pair = [w for w in weak_rows if (w.crossing.j, w.crossing.k) == (row.crossing.j, row.crossing.k)]
    return min(same_pair, key=lambda w: abs(w.crossing.t - row.crossing.t))


def test_6_weak_vs_strong_interference(results, record):
    weak, strong = results["weak"].correlation, results["strong"].correlation
    averages_ok = strong.mean_i_max < weak.mean_i_max
    late = [r for r in strong.at_crossings if r.crossing.t > 1.0]
    violations = [r for r in late if not r.i_max < _matching_weak_crossing(weak.at_crossings, r).i_max]
    ok = averages_ok and bool(late) and not violations
    worst_ratio = max(r.i_max / _matching_weak_crossing(weak.at_crossings, r).i_max for r in late)
    record(6, "time-averaged and per-crossing i_max: strong < weak", ok,
           f"mean i_max weak {weak.mean_i_max:.4f}, strong {strong.mean_i_max:.4f}; "
           f"{len(late)} strong crossings after t=1, worst ratio {worst_ratio:.3f}")
    assert ok


def test_7_branching_ordering(results, record):
    weak_b, strong_b = results["weak"].branch, results["strong"].branch
    dec = results["decoupled"].branch
    ok = strong_b.mean_B > weak_b.mean_B and not dec.B.any()
    record(7, "mean B strong > weak, B == 0 decoupled", ok,
           f"weak {weak_b.mean_B:.4f}, strong {strong_b.mean_B:.4f}, decoupled max {np.abs(dec.B).max():.1e}")
    assert ok


def test_8_structural(record, tmp_path, monkeypatch):
    rc = preset_config("weak")
    eig = checks.check_eigen(rc).value
    group = max(checks.group_property_error(rc), checks.group_property_error(preset_config("strong")))
    part = max(checks.partition_error(rc, t) for t in rc.snapshot_times)
    monkeypatch.setenv("CATBRANCH_THREADS", "1")
    run(rc, tmp_path / "a")
    monkeypatch.setenv("CATBRANCH_THREADS", "4")
    run(rc, tmp_path / "b")
    names = ["snapshots.csv", "imax.csv", "classical.csv", "branching.csv", "crossings.csv", "summary.txt"]
    identical = all(filecmp.cmp(tmp_path / "a" / n, tmp_path / "b" / n, shallow=False) for n in names)
    ok = eig <= 1e-12 and group <= 1e-10 and part <= 1e-12 and identical
    record(8, "eigen residual, group property, partition, byte-identical outputs", ok,
           f"eig {eig:.1e}, group {group:.1e}, partition {part:.1e}, identical={identical}")
    assert ok
