import numpy as np
import pytest

from qbilliard.clock import (
    ClockSpec,
    clock_state,
    embed,
    evolution_operator,
    evolved_clock,
    orthogonalisation_time,
    overlap,
    vacuum_evolution_operator,
)


def test_energy_ladder_defaults():
    spec = ClockSpec(4, spacing=0.5)
    assert np.allclose(spec.energies, [0.5, 1.0, 1.5, 2.0])
    assert ClockSpec(3, base_energy=2.0).energies[0] == 2.0


def test_orthogonalisation_time():
    spec = ClockSpec(5, spacing=2.0, hbar=3.0)
    assert orthogonalisation_time(spec) == pytest.approx(2 * np.pi * 3.0 / (5 * 2.0))


@pytest.mark.parametrize("N", range(1, 9))
def test_orthogonal_family(N):
    spec = ClockSpec(N)
    vecs = np.array([evolved_clock(spec, k, spec.t_perp) for k in range(N)])
    gram = vecs.conj() @ vecs.T
    assert np.abs(gram - np.eye(N)).max() < 1e-12


def test_clock_returns_after_n_steps_up_to_phase():
    spec = ClockSpec(4)
    a = clock_state(spec, 0.0)
    b = evolved_clock(spec, 4, spec.t_perp)
    assert abs(abs(np.vdot(a, b)) - 1) < 1e-12


def test_overlap_dirichlet_modulus():
    # |sum_n exp(-2 pi i n x / N)| / N = |sin(pi x)| / (N |sin(pi x / N)|)
    spec = ClockSpec(5)
    for x in (0.13, 0.5, 1.7, 3.3):
        got = abs(overlap(spec, 0.0, x * spec.t_perp))
        want = abs(np.sin(np.pi * x)) / (5 * abs(np.sin(np.pi * x / 5)))
        assert got == pytest.approx(want, abs=1e-13)


def test_overlap_matches_inner_product_random():
    rng = np.random.default_rng(11)
    for _ in range(50):
        spec = ClockSpec(int(rng.integers(1, 9)), spacing=rng.uniform(0.2, 3), hbar=rng.uniform(0.5, 2))
        t, dt = rng.uniform(-4, 4, size=2)
        direct = np.vdot(clock_state(spec, t), clock_state(spec, t + dt))
        assert abs(direct - overlap(spec, t, dt)) < 1e-12


def test_operators():
    spec = ClockSpec(3)
    R = evolution_operator(spec, 0.4)
    assert np.allclose(R @ clock_state(spec, 1.0), clock_state(spec, 1.4))
    Rbar = vacuum_evolution_operator(spec, 0.4)
    assert Rbar[0, 0] == 1
    assert np.allclose(Rbar[1:, 1:], R)
    v = embed(clock_state(spec, 0.0))
    assert v[0] == 0 and np.isclose(np.linalg.norm(v), 1)


@pytest.mark.parametrize("kw", [{"levels": 0}, {"levels": 2.5}, {"levels": 2, "spacing": 0}, {"levels": 2, "hbar": -1}])
def test_invalid_specs(kw):
    with pytest.raises(ValueError):
        ClockSpec(**kw)
