import numpy as np
import pytest

from qbilliard.clock import ClockSpec, clock_state, vacuum_evolution_phases
from qbilliard.states import (
    DensityOperator,
    PureState,
    WeightProfile,
    basis_digits,
    basis_index,
    evolved_input,
    localized_input,
    occupation_counts,
    occupation_patterns,
    partial_trace,
    read_state,
    tensor,
    trace_distance,
    weighted_partial_trace,
    write_state,
)


def random_density(rng, n, d):
    D = d**n
    A = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    rho = A @ A.conj().T
    return DensityOperator(rho / np.trace(rho), n, d)


def test_mixed_radix_mode_one_most_significant():
    assert basis_index((1, 0, 2), 3) == 1 * 9 + 0 * 3 + 2
    assert tuple(basis_digits(11, 3, 3)) == (1, 0, 2)


def test_occupation_tables():
    counts = occupation_counts(2, 3)
    pats = occupation_patterns(2, 3)
    assert counts[basis_index((0, 0), 3)] == 0
    assert counts[basis_index((2, 1), 3)] == 2
    assert pats[basis_index((0, 2), 3)] == 0b01
    assert pats[basis_index((1, 0), 3)] == 0b10


def test_partial_trace_matches_einsum():
    rng = np.random.default_rng(0)
    rho = random_density(rng, 3, 2)
    t = rho.matrix.reshape((2,) * 6)
    want = np.einsum("abcdbf->acdf", t).reshape(4, 4)
    got = partial_trace(rho, [2])
    assert np.allclose(got.matrix, want)
    assert got.num_modes == 2


def test_weighted_partial_trace_with_unit_weights_is_partial_trace():
    rng = np.random.default_rng(1)
    rho = random_density(rng, 4, 2)
    got = weighted_partial_trace(rho.matrix, np.ones(2), 4, 2)
    assert np.allclose(got, partial_trace(rho, [3, 4]).matrix)


def test_weighted_partial_trace_weights():
    rng = np.random.default_rng(2)
    rho = random_density(rng, 2, 3)
    w = np.array([0.5, 0.2, 0.3])
    t = rho.matrix.reshape(3, 3, 3, 3)
    want = np.einsum("ajbj,j->ab", t, w)
    assert np.allclose(weighted_partial_trace(rho.matrix, w, 2, 3), want)


def test_trace_distance_of_pure_states():
    rng = np.random.default_rng(3)
    a = rng.normal(size=4) + 1j * rng.normal(size=4)
    b = rng.normal(size=4) + 1j * rng.normal(size=4)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    want = np.sqrt(1 - abs(np.vdot(a, b)) ** 2)
    assert trace_distance(np.outer(a, a.conj()), np.outer(b, b.conj())) == pytest.approx(want)


def test_localized_input():
    spec = ClockSpec(2)
    c = [0.25, 0.75]
    psi = localized_input(clock_state(spec, 0.0), c)
    assert psi.norm == pytest.approx(1)
    phi = np.concatenate(([0], clock_state(spec, 0.0)))
    vac = np.array([1, 0, 0])
    want = 0.5 * np.kron(phi, vac) + np.sqrt(0.75) * np.kron(vac, phi)
    assert np.allclose(psi.amplitudes, want)
    with pytest.raises(ValueError):
        localized_input(clock_state(spec, 0.0), [0.5, 0.6])


def test_evolved_inputs_orthogonal_when_levels_exceed_modes():
    spec = ClockSpec(4)
    vecs = [evolved_input(spec, 3, k).amplitudes for k in range(4)]
    gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    assert np.abs(gram - np.eye(4)).max() < 1e-12


def test_evolved_input_wraps_at_equal_levels():
    spec = ClockSpec(2)
    a = evolved_input(spec, 2, 0).amplitudes
    b = evolved_input(spec, 2, 2).amplitudes
    assert abs(abs(np.vdot(a, b)) - 1) < 1e-12


def test_evolved_input_is_phased_input():
    spec = ClockSpec(3)
    dt = 0.3
    ph = vacuum_evolution_phases(spec, dt)
    diag = np.kron(ph, ph) ** 2
    assert np.allclose(evolved_input(spec, 2, 2, dt).amplitudes, diag * evolved_input(spec, 2, 0, dt).amplitudes)


def test_tensor_and_validation():
    a = PureState(np.array([0, 1, 0], dtype=complex), 1, 3)
    b = PureState(np.array([1, 0, 0], dtype=complex), 1, 3)
    ab = tensor(a, b)
    assert ab.num_modes == 2 and ab.amplitudes[3] == 1
    with pytest.raises(ValueError):
        PureState(np.zeros(4), 1, 3)
    bad = DensityOperator(np.diag([1.0, -0.5, 0.0]).astype(complex), 1, 3)
    with pytest.raises(ValueError):
        bad.validate()


def test_weight_profiles():
    prof = WeightProfile.incomplete(0.4, 3)
    assert np.allclose(prof.vector(), [0.4, 0.2, 0.2, 0.2])
    assert np.allclose(WeightProfile.uniform(2).vector(), 1)


def test_state_file_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    rho = random_density(rng, 2, 2)
    write_state(tmp_path / "rho.txt", rho, comment="test")
    back = read_state(tmp_path / "rho.txt")
    assert np.array_equal(back.matrix, rho.matrix)
    psi = evolved_input(ClockSpec(2), 2, 1)
    write_state(tmp_path / "psi.txt", psi)
    assert np.array_equal(read_state(tmp_path / "psi.txt").amplitudes, psi.amplitudes)
