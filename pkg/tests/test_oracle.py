import numpy as np
import pytest
from scipy.special import erf

from catbranch.checks import grid3d_errors, grid_cat_error
from catbranch.errors import BoundaryMassTooLarge, ResolutionTooCoarse
from catbranch.gaussian import ComplexGaussianTerm, integrate_all, stack
from catbranch.model import CatSpec, OscillatorNetwork, validate
from catbranch.normal_modes import basis_for
from catbranch.oracle import (
    QuadratureSpec,
    cat_on_grid,
    grid_evolve,
    harmonic_potential,
    quad_integrate,
    rk4_trajectories,
    simpson_weights,
)
from catbranch.propagation import build_initial_terms, evolve_terms
from catbranch.reduced_density import evaluate_1d


def test_standard_kernel():
    val = quad_integrate(ComplexGaussianTerm(0, [0], [[1]]), QuadratureSpec.uniform(1, -12, 12, 4001))
    assert abs(val - np.sqrt(2 * np.pi)) <= 1e-10


def test_oscillatory_kernel():
    t = ComplexGaussianTerm(0, [0], [[1 - 2j]])
    val = quad_integrate(t, QuadratureSpec.uniform(1, -12, 12, 16001))
    assert abs(val - integrate_all(t)) / abs(integrate_all(t)) <= 1e-7


def test_boundary_check():
    with pytest.raises(BoundaryMassTooLarge):
        quad_integrate(ComplexGaussianTerm(0, [0], [[1]]), QuadratureSpec.uniform(1, -1, 1, 101))


def test_spec_rejects_even_counts():
    with pytest.raises(ValueError):
        QuadratureSpec.uniform(1, -1, 1, 100)


def test_simpson_fourth_order():
    exact = np.sqrt(np.pi / 2) * erf(2 / np.sqrt(2))
    errs = []
    for n in (11, 21, 41):
        x = np.linspace(0, 2, n)
        errs.append(abs(simpson_weights(0, 2, n) @ np.exp(-(x**2) / 2) - exact))
    for coarse, fine in zip(errs, errs[1:]):
        assert 14 <= coarse / fine <= 17


def oscillator_1d(mass=1.5, k=2.5, d=-5.0, sigma=0.5):
    net = OscillatorNetwork((mass,), (k,), ((0.0,),))
    return validate(net, CatSpec((d,), (sigma,)))


def test_ground_state_stationary_on_grid():
    m, k = 1.5, 2.5
    omega = np.sqrt(k / m)
    x = np.linspace(-12, 12, 4096, endpoint=False)
    psi0 = np.exp(-m * omega * x**2 / 2)
    pot = 0.5 * k * x**2
    psi = grid_evolve(psi0, [x], pot, [m], 2 * np.pi / omega, 10_000)
    rho0, rho = np.abs(psi0) ** 2, np.abs(psi) ** 2
    assert np.max(np.abs(rho - rho0)) <= 1e-8
    assert np.sum(rho) == pytest.approx(np.sum(rho0), rel=1e-10)


def test_cat_matches_analytic_over_one_period():
    assert grid_cat_error(1.5, 2.5, -5.0, 0.5) <= 1e-6


def test_strang_second_order():
    cfg = oscillator_1d()
    x = np.linspace(-12, 12, 1024, endpoint=False)
    psi0 = cat_on_grid([x], [-5.0], [0.5])
    pot = harmonic_potential([x], cfg.potential)
    t = 1.1
    exact = evaluate_1d(evolve_terms(stack(lt.term for lt in build_initial_terms(cfg)), basis_for(cfg.network), 1.0, t), x)
    errs = [np.max(np.abs(grid_evolve(psi0, [x], pot, [1.5], t, s) - exact)) for s in (200, 400, 800)]
    for coarse, fine in zip(errs, errs[1:]):
        assert 3.5 <= coarse / fine <= 4.5


def test_resolution_checks():
    x = np.linspace(-5, 5, 64, endpoint=False)
    narrow = np.exp(-(x**2) / (4 * 0.02**2))
    with pytest.raises(ResolutionTooCoarse):
        grid_evolve(narrow, [x], np.zeros_like(x), [1.0], 1.0, 10)
    x = np.linspace(-20, 20, 256, endpoint=False)
    wide = np.exp(-(x**2) / 4)
    with pytest.raises(ResolutionTooCoarse, match="phase"):
        grid_evolve(wide, [x], np.zeros_like(x), [1.0], 100.0, 1)
    grid_evolve(wide, [x], np.zeros_like(x), [1.0], 100.0, 1000)


def test_rk4_examples(weak):
    cfg = oscillator_1d(d=2.0)
    times, xs, _ = rk4_trajectories(cfg, [(1,)], 1e-3, 5.0)
    np.testing.assert_allclose(xs[0, :, 0], 2.0 * np.cos(np.sqrt(2.5 / 1.5) * times), atol=1e-10)
    _, xs, _ = rk4_trajectories(weak, [(0, 0, 0)], 1e-2, 6.0)
    assert not xs.any()


@pytest.mark.slow
def test_weak_grid3d_cross_check(weak_rc):
    rho_err, imax_err = grid3d_errors(weak_rc)
    assert rho_err <= 1e-3
    assert imax_err <= 1e-3
