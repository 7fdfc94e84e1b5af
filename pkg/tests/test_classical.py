import numpy as np
import pytest

from catbranch.checks import rk4_error
from catbranch.classical import (
    branching_metric,
    correlate,
    evolve_ensemble,
    find_crossings,
    phase_space,
    time_average,
)
from catbranch.errors import EmptyInput
from catbranch.model import CatSpec, OscillatorNetwork, validate
from catbranch.oracle import classical_energy

from conftest import three_body

T_WINDOW = np.round(np.arange(0, 1202) * 0.005, 12)


def test_single_oscillator():
    m, k, d = 1.5, 2.5, -5.0
    cfg = validate(OscillatorNetwork((m,), (k,), ((0.0,),)), CatSpec((d,), (0.5,)))
    ts = np.linspace(0, 10, 101)
    ens = evolve_ensemble(cfg, None, ts)
    np.testing.assert_allclose(ens.x_sys[1], d * np.cos(np.sqrt(k / m) * ts), atol=1e-12)
    assert not ens.x_sys[0].any()


def test_initial_conditions(weak):
    ens = evolve_ensemble(weak, None, T_WINDOW)
    for j, lab in enumerate(ens.labels):
        assert ens.x_sys[j, 0] == lab[0] * weak.cat.d[0]
    assert np.abs(ens.x_sys[0]).max() == 0.0


def test_matches_rk4(weak_rc, strong_rc):
    for rc in (weak_rc, strong_rc):
        dx, drift = rk4_error(rc)
        assert dx <= 1e-6
        assert drift <= 1e-8


def test_energy_conserved(weak, strong_rc):
    for cfg in (weak, strong_rc.config):
        ens = evolve_ensemble(cfg, None, np.linspace(0, 6.005, 301))
        x, v = phase_space(ens)
        e = classical_energy(cfg, x, v)
        for j in range(1, 8):
            assert np.max(np.abs(e[j] - e[j, 0])) / e[j, 0] <= 1e-9


def test_superposition(weak):
    ts = np.linspace(0, 6.005, 50)
    ens = evolve_ensemble(weak, None, ts)
    idx = {lab: j for j, lab in enumerate(ens.labels)}
    singles = [ens.x_sys[idx[tuple(int(i == k) for i in range(3))]] for k in range(3)]
    for lab, j in idx.items():
        expected = sum(bit * s for bit, s in zip(lab, singles))
        np.testing.assert_allclose(ens.x_sys[j], expected, atol=1e-10)


def test_branching_zero_without_coupling():
    rep = branching_metric(evolve_ensemble(three_body(0.0, 0.0), None, T_WINDOW))
    assert not rep.B.any()


def test_branching_zero_at_t0(weak):
    rep = branching_metric(evolve_ensemble(weak, None, T_WINDOW))
    assert rep.B[0] == 0.0
    assert np.all(rep.B >= 0)


def test_strong_branches_more(weak, strong_rc):
    weak_b = branching_metric(evolve_ensemble(weak, None, T_WINDOW))
    strong_b = branching_metric(evolve_ensemble(strong_rc.config, None, T_WINDOW))
    assert strong_b.mean_B > weak_b.mean_B


def test_decoupled_pair_crossings():
    # two independent oscillators: particle 1 starts at d, particle 2 at rest in its origin
    omega, d = 1.3, 2.0
    net = OscillatorNetwork((1.0, 1.0), (omega**2, 1.0), ((0.0, 0.0), (0.0, 0.0)))
    cfg = validate(net, CatSpec((d, 1.0), (0.5, 0.5)))
    ts = np.arange(0, 10.0, 0.005)
    cr = find_crossings(evolve_ensemble(cfg, None, ts))
    expected = [(2 * m + 1) * np.pi / (2 * omega) for m in range(4) if (2 * m + 1) * np.pi / (2 * omega) < 10]
    # (0,0) stays at 0, (1,*) cross it at the zeros of d cos(omega t)
    zero_pair = sorted(c.t for c in cr if c.j == (0, 0) and c.k == (1, 0))
    np.testing.assert_allclose(zero_pair, expected, atol=1e-9)
    for c in cr:
        assert c.j[0] != c.k[0]


def test_degenerate_groups_have_no_crossings():
    net = OscillatorNetwork.from_pairs([1.0, 1.0], [1.0, 0.0], {(0, 1): 0.3})
    cfg = validate(net, CatSpec((0.0, 2.0), (0.5, 0.5)))
    ens = evolve_ensemble(cfg, None, np.arange(0, 6, 0.005))
    crossings = find_crossings(ens)
    for c in crossings:
        # only pairs whose environment packets differ can cross
        assert c.j[1] != c.k[1]
    assert not [c for c in crossings if c.j[1] == c.k[1]]


def test_weak_has_crossings(weak):
    cr = find_crossings(evolve_ensemble(weak, None, T_WINDOW))
    assert cr
    assert all(0 <= c.t <= 6.005 for c in cr)


def test_crossing_roots_are_refined(strong_rc):
    ens = evolve_ensemble(strong_rc.config, None, T_WINDOW)
    for c in find_crossings(ens)[:10]:
        j, k = ens.labels.index(c.j), ens.labels.index(c.k)
        assert abs(ens.position(j, c.t)[0] - ens.position(k, c.t)[0]) <= 1e-7


def test_correlate(weak):
    rep = branching_metric(evolve_ensemble(weak, None, T_WINDOW))
    series = [(t, np.sin(t) ** 2) for t in np.linspace(0, 6.005, 200)]
    out = correlate(rep, series)
    assert len(out.at_crossings) == len(rep.crossings)
    assert out.mean_B == pytest.approx(rep.mean_B)
    assert out.mean_i_max == pytest.approx(time_average(*zip(*series)))
    with pytest.raises(EmptyInput):
        correlate(rep, [])


def test_unsorted_times_rejected(weak):
    with pytest.raises(ValueError):
        evolve_ensemble(weak, None, [1.0, 0.5])
