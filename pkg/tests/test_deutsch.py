import numpy as np
import pytest
from conftest import dense_unitary

from qbilliard import deutsch
from qbilliard.clock import ClockSpec
from qbilliard.errors import SizeCapError
from qbilliard.gates import CircuitSpec, build_circuit
from qbilliard.states import DensityOperator, evolved_input, trace_distance


def random_density(rng, n, d, rank=None):
    D = d**n
    A = rng.normal(size=(D, rank or D)) + 1j * rng.normal(size=(D, rank or D))
    rho = A @ A.conj().T
    return DensityOperator(rho / np.trace(rho), n, d)


def dense_maps(spec, sigma, theta):
    """Both reduced outputs of ``U (sigma x theta) U^dagger`` by brute force."""
    U = dense_unitary(build_circuit(spec))
    D = sigma.matrix.shape[0]
    joint = U @ np.kron(sigma.matrix, theta.matrix) @ U.conj().T
    t = joint.reshape(D, D, D, D)
    return np.einsum("iaib->ab", t), np.einsum("aibi->ab", t)


@pytest.mark.parametrize("M,N,power", [(1, 2, None), (2, 2, None), (2, 2, 0.37), (2, 3, None)])
def test_channel_matches_dense_oracle(M, N, power):
    rng = np.random.default_rng(M + N)
    spec = CircuitSpec(M, ClockSpec(N), dt=0.6, swap_power=power)
    sigma = random_density(rng, M, N + 1, rank=2)
    theta = random_density(rng, M, N + 1)
    cv, cr = dense_maps(spec, sigma, theta)
    ch = deutsch.DeutschChannel(spec, sigma)
    assert np.abs(ch.cv(theta).matrix - cv).max() < 1e-12
    assert np.abs(ch.cr(theta).matrix - cr).max() < 1e-12
    assert np.abs(deutsch.cv_map(spec, sigma, theta).matrix - cv).max() < 1e-12


def test_channel_is_trace_preserving():
    rng = np.random.default_rng(9)
    spec = CircuitSpec(2, ClockSpec(2))
    ch = deutsch.DeutschChannel(spec, evolved_input(spec.clock, 2))
    out = ch.cv(random_density(rng, 2, 3))
    assert np.trace(out.matrix) == pytest.approx(1)
    out.validate()


@pytest.mark.parametrize("M", [2, 3])
def test_analytic_terms_are_fixed_points(M):
    spec = CircuitSpec(M, ClockSpec(M))
    ch = deutsch.DeutschChannel(spec, evolved_input(spec.clock, M))
    for alpha in deutsch.alpha_vectors(M):
        term = deutsch.analytic_term(alpha, spec.clock)
        assert trace_distance(ch.cv(term), term) < 1e-12


@pytest.mark.parametrize("g", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("M", [2, 3])
def test_ecp_reproduces_binomial(M, g):
    spec = CircuitSpec(M, ClockSpec(M))
    ch = deutsch.DeutschChannel(spec, evolved_input(spec.clock, M))
    res = deutsch.ecp_fixed_point(ch, deutsch.EcpSeed(g))
    assert res.converged and res.residual < 1e-12
    coeffs = deutsch.extract_coefficients(res.theta)
    assert np.abs(coeffs.values - deutsch.ecp_coefficients(g, M).values).max() < 1e-10
    assert trace_distance(res.theta, deutsch.analytic_cv_state(coeffs, spec.clock)) < 1e-10
    assert np.abs(ch.cr(res.theta).matrix - deutsch.analytic_cr_state(coeffs, spec.clock).matrix).max() < 1e-10


def test_two_mode_coefficients():
    c = deutsch.ecp_coefficients(0.3, 2)
    assert c[(0, 0)] == pytest.approx(0.09)
    assert c[(1, 0)] == pytest.approx(0.21) and c[(0, 1)] == pytest.approx(0.21)
    assert c[(1, 1)] == pytest.approx(0.49)
    assert np.allclose(c.by_count(), [0.09, 0.42, 0.49])


def test_coherent_seed_loses_count_changing_coherence_only():
    # Coherence between different loop counts is removed within a few
    # passes; coherence between equal-count patterns such as |10> and |01>
    # is itself preserved by the loop map and survives.
    spec = CircuitSpec(2, ClockSpec(2))
    ch = deutsch.DeutschChannel(spec, evolved_input(spec.clock, 2))
    theta = deutsch.seed_state(deutsch.EcpSeed(0.4, coherent=True), 2, 2)
    assert deutsch.count_coherence(theta) > 0.1
    for _ in range(5):
        theta = ch.cv(theta)
    assert deutsch.count_coherence(theta) < 1e-15
    assert deutsch.occupation_coherence(theta) == pytest.approx(0.12, abs=1e-12)
    assert trace_distance(ch.cv(theta), theta) < 1e-14
    # the external output does not see the surviving coherence
    coeffs = deutsch.extract_coefficients(theta)
    assert np.abs(ch.cr(theta).matrix - deutsch.analytic_cr_state(coeffs, spec.clock).matrix).max() < 1e-12


def test_ecp_reports_nonconvergence():
    clock = ClockSpec(2)
    spec = CircuitSpec(2, clock, dt=0.5 * clock.t_perp)
    ch = deutsch.DeutschChannel(spec, evolved_input(clock, 2, dt=spec.dt))
    res = deutsch.ecp_fixed_point(ch, deutsch.EcpSeed(0.5, coherent=True), tol=1e-300, max_iter=50)
    assert not res.converged
    assert res.iterations == 50 and len(res.distances) == 50
    with pytest.raises(ValueError):
        deutsch.ecp_fixed_point(ch, deutsch.EcpSeed(0.5), tol=0)


def test_isometry_cap():
    spec = CircuitSpec(4, ClockSpec(4))
    with pytest.raises(SizeCapError):
        deutsch.DeutschChannel(spec, evolved_input(spec.clock, 4))


def test_seed_validation():
    with pytest.raises(ValueError):
        deutsch.EcpSeed(1.5)
    with pytest.raises(ValueError):
        deutsch.EcpSeed(0.5, clock_weights=(0.6, 0.6))
    seed = deutsch.EcpSeed(0.5, clock_weights=(0.25, 0.75))
    rho = deutsch.seed_state(seed, 1, 2)
    assert np.allclose(np.diag(rho.matrix).real, [0.5, 0.125, 0.375])


def test_nonuniform_seed_weights_give_same_counts():
    spec = CircuitSpec(2, ClockSpec(2))
    ch = deutsch.DeutschChannel(spec, evolved_input(spec.clock, 2))
    res = deutsch.ecp_fixed_point(ch, deutsch.EcpSeed(0.3, clock_weights=(0.9, 0.1)))
    assert np.allclose(deutsch.dctc_pmf(deutsch.extract_coefficients(res.theta)), [0.09, 0.42, 0.49])


def test_probability_helpers():
    assert deutsch.dctc_probability(1, g=0.5, M=2) == pytest.approx(0.5)
    assert deutsch.dctc_probability(0, q=0.25, M=2) == pytest.approx(0.25)
    c = deutsch.ecp_coefficients(0.5, 3)
    assert deutsch.dctc_probability(3, c) == pytest.approx(0.125)
    with pytest.raises(ValueError):
        deutsch.dctc_probability(4, g=0.5, M=3)
    with pytest.raises(ValueError):
        deutsch.dctc_probability(0, g=0.5)


def test_projective_readout_agrees_when_levels_exceed_modes():
    spec = CircuitSpec(2, ClockSpec(3))
    ch = deutsch.DeutschChannel(spec, evolved_input(spec.clock, 2))
    res = deutsch.ecp_fixed_point(ch, deutsch.EcpSeed(0.3))
    proj = deutsch.projective_pmf(ch.cr(res.theta), spec.clock)
    assert np.allclose(proj, [0.09, 0.42, 0.49], atol=1e-10)


@pytest.mark.parametrize("M", [2, 3])
def test_separate_wormholes_match_single_wormhole(M):
    g = 0.35
    spec = CircuitSpec(M, ClockSpec(M))
    ch = deutsch.DeutschChannel(spec, evolved_input(spec.clock, M))
    res = deutsch.ecp_fixed_point(ch, deutsch.EcpSeed(g))
    sep = deutsch.separate_ctc_outputs([g] * M, spec.clock)
    assert trace_distance(ch.cr(res.theta), sep.cr_state) < 1e-10
    assert np.allclose(sep.cr_weights, deutsch.ecp_pmf(M, g))
    for rho in sep.cv_states + sep.clock_mixtures:
        assert np.trace(rho.matrix) == pytest.approx(1)


@pytest.mark.parametrize("base_energy", [0.0, 0.3, 5.0])
def test_base_energy_does_not_change_counts(base_energy):
    spec = CircuitSpec(2, ClockSpec(2, base_energy=base_energy))
    ch = deutsch.DeutschChannel(spec, evolved_input(spec.clock, 2))
    res = deutsch.ecp_fixed_point(ch, deutsch.EcpSeed(0.4))
    assert np.allclose(deutsch.dctc_pmf(deutsch.extract_coefficients(res.theta)), deutsch.ecp_pmf(2, 0.4), atol=1e-10)
