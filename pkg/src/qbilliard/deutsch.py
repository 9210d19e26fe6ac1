"""Deutsch self-consistency for the looped bundle.

The looped (CV) state ``theta`` must be a fixed point of

    cv(theta) = tr_CR[U (sigma x theta) U^dagger]

and the external output is ``cr(theta) = tr_CV[U (sigma x theta) U^dagger]``.
Both maps are evaluated through the isometry ``V_r = U (|s_r> x 1_CV)`` for
each eigenvector ``s_r`` of ``sigma``, so the joint ``2M``-mode density is
never formed.

Loop counts are read from the CV occupation pattern.  At ``N = M`` the
evolved inputs ``Phi^(0)`` and ``Phi^(M)`` are the same ray (``R(t_perp)^N``
is a global phase), so projecting the CR output onto them cannot tell the
two apart.  The occupation weights ``g_alpha = tr[P_alpha theta]`` can.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import _binomial, _engine
from .clock import clock_state, vacuum_evolution_phases
from .errors import SizeCapError
from .gates import Circuit, CircuitSpec, build_circuit
from .states import (
    DensityOperator,
    PureState,
    evolved_input,
    kron_all,
    occupation_counts,
    occupation_patterns,
    trace_distance,
)

ISOMETRY_CAP = 2**24


def _as_circuit(circuit):
    if isinstance(circuit, CircuitSpec):
        return build_circuit(circuit)
    if isinstance(circuit, Circuit):
        return circuit
    raise TypeError(f"expected a Circuit or CircuitSpec, got {type(circuit).__name__}")


def alpha_vectors(M):
    """All ``2**M`` occupation vectors, in the storage order of the coefficients."""
    return list(product((0, 1), repeat=M))


@dataclass(frozen=True, eq=False)
class FixedPointCoefficients:
    """Weights ``g_alpha`` of the classical fixed points.

    ``values[i]`` belongs to the occupation vector whose binary encoding,
    with mode 1 as the most significant bit, is ``i``.
    """

    M: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (2**self.M,):
            raise ValueError(f"need {2**self.M} coefficients, got shape {v.shape}")
        if np.any(v < -1e-12):
            raise ValueError("coefficients must be nonnegative")
        if abs(v.sum() - 1) > 1e-12:
            raise ValueError(f"coefficients sum to {v.sum()!r}, not 1")
        object.__setattr__(self, "values", np.clip(v, 0.0, None))

    def __getitem__(self, alpha):
        index = 0
        for bit in alpha:
            index = 2 * index + int(bit)
        return float(self.values[index])

    def items(self):
        return zip(alpha_vectors(self.M), self.values)

    def by_count(self):
        """``sum_{|alpha| = k} g_alpha`` for ``k = 0..M``."""
        counts = np.array([sum(a) for a in alpha_vectors(self.M)])
        return np.bincount(counts, weights=self.values, minlength=self.M + 1)


def ecp_coefficients(g, M):
    """Coefficients fixed by the product seed: ``g**(M-|alpha|) (1-g)**|alpha|``."""
    if not 0 <= g <= 1:
        raise ValueError(f"g must lie in [0, 1], got {g}")
    values = [g ** (M - sum(a)) * (1 - g) ** sum(a) for a in alpha_vectors(M)]
    return FixedPointCoefficients(M, np.array(values))


@dataclass(frozen=True)
class EcpSeed:
    """Product seed ``[g |0><0| + (1-g) sum_n w_n |n><n|]`` on every CV mode.

    With ``coherent=True`` each mode instead starts in the pure state
    ``sqrt(g)|0> + sqrt(1-g) sum_n sqrt(w_n)|n>``, which carries
    clock-vacuum coherences the iteration has to remove.
    """

    g: float
    clock_weights: tuple | None = None
    coherent: bool = False

    def __post_init__(self):
        if not 0 <= self.g <= 1:
            raise ValueError(f"g must lie in [0, 1], got {self.g}")
        if self.clock_weights is not None:
            w = tuple(float(x) for x in self.clock_weights)
            if any(x < 0 for x in w) or abs(sum(w) - 1) > 1e-12:
                raise ValueError("clock weights must be nonnegative and sum to 1")
            object.__setattr__(self, "clock_weights", w)

    def weights(self, levels):
        if self.clock_weights is None:
            return np.full(levels, 1.0 / levels)
        if len(self.clock_weights) != levels:
            raise ValueError(f"need {levels} clock weights, got {len(self.clock_weights)}")
        return np.array(self.clock_weights)


def seed_state(seed, M, levels):
    w = seed.weights(levels)
    if seed.coherent:
        v = np.sqrt(np.concatenate(([seed.g], (1 - seed.g) * w))).astype(complex)
        return PureState(kron_all([v] * M), M, levels + 1).density()
    single = np.diag(np.concatenate(([seed.g], (1 - seed.g) * w))).astype(complex)
    mat = np.ones((1, 1), dtype=complex)
    for _ in range(M):
        mat = np.kron(mat, single)
    return DensityOperator(mat, M, levels + 1)


class DeutschChannel:
    """The CV and CR maps of one circuit and one fixed CR input.

    Parameters
    ----------
    circuit : Circuit or CircuitSpec
        A ``2M``-mode circuit; modes ``1..M`` are CR, ``M+1..2M`` are CV.
    sigma : PureState or DensityOperator
        CR input.  Mixed inputs are split into their eigenvectors.
    cap : int
        Refuse isometries with more than ``cap`` complex entries.
    """

    def __init__(self, circuit, sigma, cap=ISOMETRY_CAP):
        self.circuit = _as_circuit(circuit)
        if self.circuit.n_modes % 2:
            raise ValueError("circuit must have an even number of modes")
        self.M = self.circuit.n_modes // 2
        self.dim = self.circuit.dim
        d_half = self.dim**self.M
        if sigma.num_modes != self.M or sigma.dim != self.dim:
            raise ValueError(
                f"input has {sigma.num_modes} modes of dim {sigma.dim}, expected {self.M} of {self.dim}"
            )
        if isinstance(sigma, PureState):
            weights, vectors = np.array([1.0]), sigma.normalized().amplitudes[:, None]
        else:
            evals, evecs = np.linalg.eigh((sigma.matrix + sigma.matrix.conj().T) / 2)
            keep = evals > 1e-14 * max(evals.max(), 1e-300)
            weights, vectors = evals[keep], evecs[:, keep]
        rank = weights.size
        if rank * d_half**3 > cap:
            raise SizeCapError(
                f"Deutsch isometry needs {rank * d_half**3} entries, cap is {cap}"
            )
        self.sigma = sigma
        self.shape = (rank, d_half, d_half, d_half)
        self.V = self._isometry(weights, vectors)
        self._kc = None

    def _isometry(self, weights, vectors):
        rank, D_half = self.shape[0], self.shape[1]
        D = D_half * D_half
        keys, amps = [], []
        cols = np.arange(D_half, dtype=np.int64)
        for r in range(rank):
            s = vectors[:, r]
            nz = np.flatnonzero(np.abs(s) > 1e-15)
            tag = r * D_half + cols
            # entries |s_code> x |col> tagged by (r, col)
            k = (tag[:, None] * D + nz[None, :] * D_half + cols[:, None]).ravel()
            a = np.broadcast_to(np.sqrt(weights[r]) * s[nz], (D_half, nz.size)).ravel()
            keys.append(k)
            amps.append(a)
        keys, amps = _engine.evolve(np.concatenate(keys), np.concatenate(amps), self.circuit)
        V = np.zeros(rank * D_half * D, dtype=complex)
        tags, codes = keys // D, keys % D
        V[(tags // D_half) * D_half * D + codes * D_half + tags % D_half] = amps
        # V[r, cr_out, cv_out, cv_in]
        return V.reshape(rank, D_half, D_half, D_half)

    def cv(self, theta):
        t = _matrix(theta)
        n, a, b = self.shape[0] * self.shape[1], self.shape[2], self.shape[3]
        if self._kc is None:
            # conj(K) laid out as (kraus, in) x out for a single matrix product
            K = self.V.reshape(n, a, b)
            self._kc = np.ascontiguousarray(K.conj().transpose(0, 2, 1).reshape(n * b, a))
        Y = (self.V.reshape(n * a, b) @ t).reshape(n, a, b).transpose(1, 0, 2).reshape(a, n * b)
        return DensityOperator(Y @ self._kc, self.M, self.dim)

    def cr(self, theta):
        t = _matrix(theta)
        rank, D_half = self.shape[0], self.shape[1]
        X = (self.V @ t).reshape(rank, D_half, -1)
        Vr = self.V.reshape(rank, D_half, -1)
        out = np.einsum("rax,rbx->ab", X, Vr.conj(), optimize=True)
        return DensityOperator(out, self.M, self.dim)


def _matrix(op):
    return op.matrix if isinstance(op, DensityOperator) else np.asarray(op, dtype=complex)


def cv_map(circuit, sigma, theta):
    """``tr_CR[U (sigma x theta) U^dagger]``."""
    return DeutschChannel(circuit, sigma).cv(theta)


def cr_map(circuit, sigma, theta):
    """``tr_CV[U (sigma x theta) U^dagger]``."""
    return DeutschChannel(circuit, sigma).cr(theta)


@dataclass(frozen=True, eq=False)
class EcpResult:
    theta: DensityOperator
    iterations: int
    residual: float
    converged: bool
    distances: list = field(default_factory=list)


def ecp_fixed_point(channel, seed, tol=1e-12, max_iter=10_000):
    """Iterate the CV map from a seed until successive iterates agree.

    Parameters
    ----------
    channel : DeutschChannel
    seed : EcpSeed or DensityOperator
    tol : float
        Stop once the trace distance between successive iterates drops
        below ``tol``.
    max_iter : int

    Returns
    -------
    EcpResult
        ``converged`` is False when ``max_iter`` was exhausted; ``theta``
        is then the last iterate.  ``residual`` is the trace distance
        between ``theta`` and its image.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if isinstance(seed, EcpSeed):
        theta = seed_state(seed, channel.M, channel.dim - 1).matrix
    else:
        theta = _matrix(seed)
    distances = []
    converged = False
    iterations = 0
    while iterations < max_iter:
        nxt = channel.cv(theta).matrix
        nxt = (nxt + nxt.conj().T) / 2
        iterations += 1
        distances.append(trace_distance(nxt, theta))
        theta = nxt
        if distances[-1] < tol:
            converged = True
            break
    residual = trace_distance(channel.cv(theta).matrix, theta)
    return EcpResult(DensityOperator(theta, channel.M, channel.dim), iterations, residual, converged, distances)


def _evolved_clock_density(clock, power, dt):
    v = np.concatenate(([0j], clock_state(clock, 0.0) * np.exp(-1j * clock.energies * dt * power / clock.hbar)))
    return np.outer(v, v.conj())


def analytic_term(alpha, clock, dt=None):
    """Classical fixed point for occupation vector ``alpha``.

    Occupied mode ``m`` holds the clock evolved ``alpha_1 + ... + alpha_m``
    times; empty modes hold the vacuum.
    """
    if dt is None:
        dt = clock.t_perp
    d = clock.levels + 1
    vac = np.zeros((d, d), dtype=complex)
    vac[0, 0] = 1
    mat = np.ones((1, 1), dtype=complex)
    count = 0
    for bit in alpha:
        count += bit
        mat = np.kron(mat, _evolved_clock_density(clock, count, dt) if bit else vac)
    return DensityOperator(mat, len(alpha), d)


def analytic_cv_state(coeffs, clock, dt=None):
    d = clock.levels + 1
    out = np.zeros((d**coeffs.M,) * 2, dtype=complex)
    for alpha, g in coeffs.items():
        if g:
            out += g * analytic_term(alpha, clock, dt).matrix
    return DensityOperator(out, coeffs.M, d)


def analytic_cr_state(coeffs, clock, dt=None, c=None):
    """``sum_alpha g_alpha |Phi^(|alpha|)><Phi^(|alpha|)|``."""
    M = coeffs.M
    out = 0
    for k, weight in enumerate(coeffs.by_count()):
        v = evolved_input(clock, M, k, dt, c).amplitudes
        out = out + weight * np.outer(v, v.conj())
    return DensityOperator(out, M, clock.levels + 1)


def extract_coefficients(theta):
    """Occupation weights ``g_alpha = tr[P_alpha theta]`` of a CV state."""
    patterns = occupation_patterns(theta.num_modes, theta.dim)
    diag = np.real(np.diag(theta.matrix))
    values = np.bincount(patterns, weights=diag, minlength=2**theta.num_modes)
    return FixedPointCoefficients(theta.num_modes, values / values.sum())


def occupation_coherence(theta):
    """Largest entry of ``theta`` between different occupation patterns."""
    patterns = occupation_patterns(theta.num_modes, theta.dim)
    off = patterns[:, None] != patterns[None, :]
    return float(np.abs(theta.matrix[off]).max(initial=0.0))


def count_coherence(theta):
    """Largest entry of ``theta`` between strings with different numbers of occupied modes.

    These are the clock-vacuum coherences that the loop map removes.
    Coherence between different patterns with the same count can survive.
    """
    counts = occupation_counts(theta.num_modes, theta.dim)
    off = counts[:, None] != counts[None, :]
    return float(np.abs(theta.matrix[off]).max(initial=0.0))


def dctc_pmf(coeffs):
    """Loop-count distribution ``Pr(k) = sum_{|alpha| = k} g_alpha``."""
    return coeffs.by_count()


def ecp_pmf(M, g):
    """``C(M, k) g**(M-k) (1-g)**k``."""
    return _binomial.binomial_pmf(M, g)


def regularized_pmf(M, q):
    """Product-seed distribution with ``g = q**(1/M)``."""
    if not 0 <= q <= 1:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    return _binomial.binomial_pmf(M, q ** (1.0 / M))


def dctc_probability(k, coeffs=None, *, g=None, q=None, M=None):
    """Probability of ``k`` loops from coefficients, from ``(g, M)`` or from ``(q, M)``.

    Valid when the loop delay equals the orthogonalisation time.
    """
    if coeffs is not None:
        pmf = dctc_pmf(coeffs)
    elif M is None:
        raise ValueError("M is required with g or q")
    elif g is not None:
        pmf = ecp_pmf(M, g)
    elif q is not None:
        pmf = regularized_pmf(M, q)
    else:
        raise ValueError("give coeffs, g or q")
    if not 0 <= k < pmf.size:
        raise ValueError(f"k={k} outside 0..{pmf.size - 1}")
    return float(pmf[k])


def projective_pmf(cr_state, clock, dt=None, c=None):
    """``<Phi^(k)| D |Phi^(k)>`` for ``k = 0..M``.

    Only a distribution when the evolved inputs are mutually orthogonal,
    which at ``dt = t_perp`` needs ``N > M``.
    """
    M = cr_state.num_modes
    out = []
    for k in range(M + 1):
        v = evolved_input(clock, M, k, dt, c).amplitudes
        out.append(float(np.real(np.vdot(v, cr_state.matrix @ v))))
    return np.array(out)


@dataclass(frozen=True, eq=False)
class SeparateOutputs:
    cv_states: list
    clock_mixtures: list
    cr_state: DensityOperator
    cr_weights: np.ndarray


def separate_ctc_outputs(g_list, clock, dt=None, c=None):
    """Outputs when each looped mode is its own wormhole.

    Runs the single-mode mixture ``d_m``, the CV states ``T_m`` and the CR
    recursion ``D_m = g_m D_(m-1) + (1-g_m) Rbar D_(m-1) Rbar^dagger`` with
    ``Rbar`` acting on every CR mode.  ``cr_weights[k]`` is the coefficient
    of ``|Phi^(k)><Phi^(k)|`` in the unravelled ``D_M``.
    """
    g_list = [float(g) for g in g_list]
    M = len(g_list)
    if M == 0 or any(not 0 <= g <= 1 for g in g_list):
        raise ValueError("need one g in [0, 1] per mode")
    if dt is None:
        dt = clock.t_perp
    d = clock.levels + 1
    rbar = vacuum_evolution_phases(clock, dt)
    phi = np.concatenate(([0j], clock_state(clock, 0.0)))
    vac = np.zeros((d, d), dtype=complex)
    vac[0, 0] = 1

    def evolve_one(rho):
        return rbar[:, None] * rho * rbar.conj()[None, :]

    d_prev = np.outer(phi, phi.conj())
    cv_states, mixtures = [], []
    for g in g_list:
        cv_states.append(DensityOperator(g * vac + (1 - g) * evolve_one(d_prev), 1, d))
        d_prev = g * d_prev + (1 - g) * evolve_one(d_prev)
        mixtures.append(DensityOperator(d_prev, 1, d))

    full = kron_all([rbar] * M)
    v = evolved_input(clock, M, 0, dt, c).amplitudes
    D = np.outer(v, v.conj())
    for g in g_list:
        D = g * D + (1 - g) * (full[:, None] * D * full.conj()[None, :])

    weights = np.ones(1)
    for g in g_list:
        weights = np.convolve(weights, [g, 1 - g])
    return SeparateOutputs(cv_states, mixtures, DensityOperator(D, M, d), weights)
