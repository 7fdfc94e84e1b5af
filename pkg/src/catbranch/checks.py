"""Named oracle cross-checks shared by ``catbranch verify`` and the test suite.

Each check returns a :class:`~catbranch.runner.Check` holding an error and
the tolerance it must stay under.
"""
from __future__ import annotations

import functools

import numpy as np

from .classical import evolve_ensemble
from .gaussian import ComplexGaussianTerm, integrate_all, marginalize, moments, stack
from .model import CatSpec, OscillatorNetwork, all_labels, validate
from .normal_modes import basis_for, mass_weighted
from .oracle import (
    QuadratureSpec,
    cat_on_grid,
    classical_energy,
    grid_evolve,
    harmonic_potential,
    quad_integrate,
    quad_marginal,
    rk4_trajectories,
)
from .propagation import build_initial_terms, evolve_terms
from .reduced_density import _pair_batch, evaluate_1d, reduced_terms_at, snapshot


def _check(name, value, tol):
    from .runner import Check

    return Check(name, float(value), tol)


def random_complex_term(rng: np.random.Generator, dim: int) -> ComplexGaussianTerm:
    """Random term with ``Re(A)`` eigenvalues in [0.6, 2] and moderate phases."""
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    re = q @ np.diag(rng.uniform(0.6, 2.0, dim)) @ q.T
    im = rng.uniform(-0.5, 0.5, (dim, dim))
    im = 0.5 * (im + im.T)
    b = rng.uniform(-0.5, 0.5, dim) + 1j * rng.uniform(-0.5, 0.5, dim)
    c = rng.uniform(-0.2, 0.2) + 1j * rng.uniform(-np.pi, np.pi)
    return ComplexGaussianTerm(c, b, re + 1j * im)


def gaussian_quadrature_error(count: int = 20, seed: int = 20141010) -> float:
    """Worst relative error of integrate_all / marginalize against Simpson quadrature."""
    rng = np.random.default_rng(seed)
    spec2 = QuadratureSpec.uniform(2, -14.0, 14.0, 1201)
    spec1 = QuadratureSpec.uniform(1, -14.0, 14.0, 2001)
    worst = 0.0
    for _ in range(count):
        term = random_complex_term(rng, 2)
        exact = integrate_all(term)
        worst = max(worst, abs(quad_integrate(term, spec2) - exact) / abs(exact))
        xs = np.linspace(-3.0, 3.0, 7)
        drop = int(rng.integers(0, 2))
        keep = 1 - drop
        analytic = np.exp(
            marginalize(term, [drop]).c
            + marginalize(term, [drop]).b[0] * xs
            - 0.5 * marginalize(term, [drop]).A[0, 0] * xs**2
        )
        numeric = quad_marginal(term, keep, xs, spec1)
        worst = max(worst, np.max(np.abs(numeric - analytic)) / np.max(np.abs(analytic)))
    return float(worst)


def check_eigen(rc):
    net = rc.network
    basis = basis_for(net)
    W = mass_weighted(rc.config.potential, net.masses)
    O = basis.O
    err = max(
        np.abs(O.T @ O - np.eye(net.n)).max(),
        np.abs(O.T @ W @ O - np.diag(basis.omega2)).max(),
    )
    return _check("eigendecomposition residual", err, 1e-12)


def check_gaussian_quadrature(rc):
    return _check("gaussian vs Simpson quadrature", gaussian_quadrature_error(), 1e-6)


def reduce_pair_error(rc, j, k, t: float = 0.505, points: int = 801) -> tuple[float, float]:
    """Analytic vs 2-D Simpson marginal of pair term ``(j, k)`` for a 3-particle run.

    Returns the error relative to the peak of the marginal and relative to
    the peak of ``integral |integrand|``; the second is the meaningful scale for
    pairs whose environment packets differ, where the integral is mostly
    cancellation of an oscillating integrand.
    """
    cfg = rc.config
    basis = basis_for(cfg.network)
    init = stack(lt.term for lt in build_initial_terms(cfg))
    term = _pair_batch(evolve_terms(init, basis, cfg.cat.hbar, t))[j, k]
    sys = cfg.system_index
    order = [sys] + [i for i in range(3) if i != sys]
    term = ComplexGaussianTerm(term.c, term.b[order], term.A[np.ix_(order, order)])
    modulus = ComplexGaussianTerm(term.c.real, term.b.real, term.A.real)
    xs = np.linspace(-12.0, 12.0, 25)
    spec = QuadratureSpec.uniform(2, -20.0, 20.0, points)
    numeric = quad_marginal(term, 0, xs, spec)
    mass = np.abs(quad_marginal(modulus, 0, xs, spec))
    red = marginalize(term, [1, 2])
    analytic = np.exp(red.c + red.b[0] * xs - 0.5 * red.A[0, 0] * xs**2)
    diff = np.max(np.abs(numeric - analytic))
    return float(diff / np.max(np.abs(analytic))), float(diff / np.max(mass))


def check_reduce_quadrature(rc, t: float = 0.505):
    cfg = rc.config
    if cfg.n != 3:
        return _check("reduce vs 2-D quadrature (n=3 only)", 0.0, 1e-6)
    labels = all_labels(3)
    k = labels.index(tuple(int(i == cfg.system_index) for i in range(3)))
    err, _ = reduce_pair_error(rc, 0, k, t)
    return _check("reduce vs 2-D quadrature", err, 1e-6)


def check_norm(rc):
    cfg = rc.config
    basis = basis_for(cfg.network)
    norms = [snapshot(cfg, basis, t, rc.grid).norm for t in (0.0,) + tuple(rc.snapshot_times)]
    drift = np.max(np.abs(np.array(norms) - norms[0])) / abs(norms[0])
    return _check("norm drift", drift, 1e-8)


def ehrenfest_error(rc, times=None) -> float:
    cfg = rc.config
    basis = basis_for(cfg.network)
    times = np.asarray(rc.snapshot_times if times is None else times, dtype=float)
    ens = evolve_ensemble(cfg, basis, times)
    m = len(ens.labels)
    worst = 0.0
    for it, t in enumerate(times):
        reduced, _ = reduced_terms_at(cfg, basis, t)
        diag = reduced[np.arange(m) * (m + 1)]
        mean, _ = moments(diag)
        worst = max(worst, np.max(np.abs(mean[:, 0] - ens.x_sys[:, it])))
    return float(worst)


def check_ehrenfest(rc):
    return _check("Ehrenfest centroids vs classical", ehrenfest_error(rc), 1e-8)


@functools.lru_cache(maxsize=8)
def rk4_error(rc, dt: float = 1e-4) -> tuple[float, float]:
    cfg = rc.config
    labels = all_labels(cfg.n)
    times, xs, vs = rk4_trajectories(cfg, labels, dt, rc.t_end)
    ens = evolve_ensemble(cfg, None, times)
    dx = np.max(np.abs(xs[:, :, cfg.system_index] - ens.x_sys))
    e = classical_energy(cfg, xs, vs)
    scale = np.maximum(np.abs(e[:, :1]), 1e-300)
    drift = np.max(np.where(e[:, :1] == 0, np.abs(e), np.abs(e - e[:, :1]) / scale))
    return float(dx), float(drift)


def check_rk4(rc):
    return _check("classical analytic vs RK4", rk4_error(rc)[0], 1e-6)


def check_rk4_energy(rc):
    return _check("RK4 energy drift", rk4_error(rc)[1], 1e-8)


def grid_cat_error(mass: float, k: float, d: float, sigma: float, hbar: float = 1.0,
                   points: int = 4096, steps_per_quarter: int = 8000) -> float:
    """1-D cat in a harmonic well: analytic vs split-operator over one period."""
    net = OscillatorNetwork((mass,), (k,), ((0.0,),))
    cfg = validate(net, CatSpec((d,), (sigma,), hbar))
    basis = basis_for(net)
    omega = np.sqrt(k / mass)
    period = 2 * np.pi / omega
    half = max(12.0, 1.5 * abs(d) + 12 * sigma)
    x = np.linspace(-half, half, points, endpoint=False)
    psi = cat_on_grid([x], [d], [sigma])
    pot = harmonic_potential([x], cfg.potential)
    init = stack(lt.term for lt in build_initial_terms(cfg))
    worst = 0.0
    for q in range(1, 5):
        psi = grid_evolve(psi, [x], pot, [mass], period / 4, steps_per_quarter, hbar)
        ev = evolve_terms(init, basis, hbar, q * period / 4)
        ana = evaluate_1d(ev, x)
        worst = max(worst, np.max(np.abs(psi - ana)) / np.max(np.abs(ana)))
    return float(worst)


def check_grid_1d(rc):
    net, cat = rc.network, rc.cat
    s = net.system_index
    err = grid_cat_error(net.masses[s], rc.config.potential[s, s], cat.d[s], cat.sigma[s], cat.hbar)
    return _check("1-D cat vs split-operator grid", err, 1e-6)


def group_property_error(rc, t1: float = 1.3, t2: float = 4.1) -> float:
    cfg = rc.config
    basis = basis_for(cfg.network)
    init = stack(lt.term for lt in build_initial_terms(cfg))
    one = evolve_terms(init, basis, cfg.cat.hbar, t2)
    two = evolve_terms(evolve_terms(init, basis, cfg.cat.hbar, t1), basis, cfg.cat.hbar, t2 - t1)
    return float(max(np.abs(one.A - two.A).max(), np.abs(one.b - two.b).max(), np.abs(one.c - two.c).max()))


def check_group(rc):
    return _check("two-step vs one-step evolution", group_property_error(rc), 1e-10)


def partition_error(rc, t: float = 1.005) -> float:
    cfg = rc.config
    reduced, mask = reduced_terms_at(cfg, basis_for(cfg.network), t)
    x = rc.grid.x
    full = evaluate_1d(reduced, x)
    parts = evaluate_1d(reduced[~mask], x) + evaluate_1d(reduced[mask], x)
    return float(np.max(np.abs(full - parts)) / np.max(np.abs(full)))


def check_partition(rc):
    return _check("diagonal + interference = total", partition_error(rc), 1e-12)


GRID3D_T = 1.005


def grid3d_errors(rc, points: int = 128, steps: int = 100, t: float = GRID3D_T) -> tuple[float, float]:
    """Reduced density and i_max from a 3-D split-operator run vs the analytic path.

    Each system packet is evolved on its own so the interference part can be
    separated on the grid as well.
    """
    cfg = rc.config
    net, cat = cfg.network, cfg.cat
    sys = net.system_index
    ens = evolve_ensemble(cfg, None, np.linspace(0.0, t, 201))
    labels = np.asarray(all_labels(cfg.n))
    x0 = labels * np.asarray(cat.d)
    axes = []
    for i in range(cfg.n):
        if i == sys:
            lo, hi = ens.x_sys.min(), ens.x_sys.max()
        else:
            lo, hi = x0[:, i].min(), x0[:, i].max()
        span = hi - lo
        axes.append(np.linspace(lo - 0.3 * span - 4.0, hi + 0.3 * span + 4.0, points, endpoint=False))
    pot = harmonic_potential(axes, cfg.potential)
    parts = []
    for bit in (0, 1):
        d = [0.0 if i == sys else cat.d[i] for i in range(cfg.n)]
        factors = []
        for i, x in enumerate(axes):
            if i == sys:
                factors.append(np.exp(-((x - bit * cat.d[i]) ** 2) / (4 * cat.sigma[i] ** 2)))
            else:
                factors.append(cat_on_grid([x], [d[i]], [cat.sigma[i]]))
        psi0 = factors[0]
        for f in factors[1:]:
            psi0 = np.multiply.outer(psi0, f)
        parts.append(grid_evolve(psi0, axes, pot, net.masses, t, steps, cat.hbar))
    env = tuple(i for i in range(cfg.n) if i != sys)
    cell = np.prod([axes[i][1] - axes[i][0] for i in env])
    total = (np.abs(parts[0] + parts[1]) ** 2).sum(axis=env) * cell
    cross = (2 * (np.conj(parts[0]) * parts[1]).real).sum(axis=env) * cell
    x = axes[sys]
    z = np.trapezoid(total, x)
    from .reduced_density import Grid

    snap = snapshot(cfg, None, t, Grid(x[0], x[-1], len(x)))
    rho_err = np.max(np.abs(total / z - snap.rho)) / np.max(snap.rho)
    imax_err = abs(np.max(np.abs(cross / z)) - snap.i_max) / snap.i_max
    return float(rho_err), float(imax_err)


def check_grid3d(rc):
    rho_err, imax_err = grid3d_errors(rc)
    return _check("3-D grid reduced density + i_max", max(rho_err, imax_err), 1e-3)


def all_checks(grid3d: bool = False):
    fns = [
        check_eigen,
        check_gaussian_quadrature,
        check_reduce_quadrature,
        check_norm,
        check_ehrenfest,
        check_rk4,
        check_rk4_energy,
        check_grid_1d,
        check_group,
        check_partition,
    ]
    if grid3d:
        fns.append(check_grid3d)
    return fns
