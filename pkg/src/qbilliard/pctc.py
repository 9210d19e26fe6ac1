"""Postselected (teleportation) closure of the loop.

The CR output is ``W |psi>`` with the reduced operator

    W = sum_j w(j) (<j|_CV x 1) U (1 x |j>_CV)

where ``j`` runs over CV basis strings.  ``w(j) = 1`` is the ordinary
partial trace.  For a Bell pair that puts weight ``h`` on the vacuum and
``(1-h)/N`` on each clock level, contracting the prepared and postselected
halves leaves exactly this sum with ``w(j)`` the product of those per-mode
weights, so incomplete teleportation needs no ancilla modes.

``W |psi>`` is computed one CV string at a time on a sparse tagged batch;
``W`` itself is only materialised on request.  The contribution of each
string is filed under its number of occupied modes, which equals the
number of loops the clock took whenever ``tr R = 0``.  This separates the
loop counts even at ``N = M``, where ``Phi^(0)`` and ``Phi^(M)`` coincide.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _binomial, _engine
from .clock import ClockSpec, evolution_phases, vacuum_evolution_phases
from .deutsch import _as_circuit
from .errors import PostselectionError, SizeCapError
from .gates import CircuitSpec, build_circuit, swap_amplitudes
from .states import (
    PureState,
    WeightProfile,
    digit_table,
    evolved_input,
    kron_all,
    occupation_counts,
)

REDUCED_CAP = 4096
ACTION_CAP = 2**24


@dataclass(frozen=True)
class PctcVariant:
    """``standard``, ``incomplete`` (Bell weight ``h``) or ``probabilistic`` (swap power ``p``)."""

    kind: str = "standard"
    h: float | None = None
    p: float | None = None

    def __post_init__(self):
        if self.kind == "standard":
            return
        if self.kind == "incomplete":
            if self.h is None or not 0 <= self.h <= 1:
                raise ValueError(f"incomplete teleportation needs h in [0, 1], got {self.h}")
        elif self.kind == "probabilistic":
            if self.p is None:
                raise ValueError("probabilistic swap needs a power p")
        else:
            raise ValueError(f"unknown variant {self.kind!r}")

    @classmethod
    def standard(cls):
        return cls()

    @classmethod
    def incomplete(cls, h):
        return cls("incomplete", h=float(h))

    @classmethod
    def probabilistic(cls, p):
        return cls("probabilistic", p=float(p))

    def profile(self, levels):
        if self.kind == "incomplete":
            return WeightProfile.incomplete(self.h, levels)
        return WeightProfile.uniform(levels)

    def circuit_spec(self, spec):
        if self.kind == "probabilistic":
            return spec.with_(swap_power=self.p)
        return spec


def _string_weights(profile, M, dim):
    w = profile.vector() if isinstance(profile, WeightProfile) else np.asarray(profile, dtype=float)
    if w.shape != (dim,):
        raise ValueError(f"need {dim} per-index weights, got shape {w.shape}")
    return np.prod(w[digit_table(M, dim)], axis=1)


def _split(circuit):
    if circuit.n_modes % 2:
        raise ValueError("circuit must have an even number of modes")
    M = circuit.n_modes // 2
    return M, circuit.dim**M


def reduced_action(circuit, psi, weights=None):
    """Loop-resolved ``W |psi>``.

    Parameters
    ----------
    circuit : Circuit or CircuitSpec
    psi : PureState or ndarray
        CR vector of length ``(N+1)**M``.
    weights : WeightProfile or array, optional
        Per-index CV weights; uniform by default.

    Returns
    -------
    ndarray of shape ``(M + 1, (N+1)**M)``
        Row ``k`` collects the strings with ``k`` occupied CV modes; the
        rows sum to ``W |psi>``.
    """
    circuit = _as_circuit(circuit)
    M, D_half = _split(circuit)
    d = circuit.dim
    vec = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    if vec.shape != (D_half,):
        raise ValueError(f"input has shape {vec.shape}, expected ({D_half},)")
    w = _string_weights(weights if weights is not None else WeightProfile.uniform(d - 1), M, d)
    strings = np.flatnonzero(w).astype(np.int64)
    nz = np.flatnonzero(vec).astype(np.int64)
    if D_half**3 >= 2**62 or strings.size * nz.size > ACTION_CAP:
        raise SizeCapError(f"reduced action on {strings.size} x {nz.size} strings exceeds cap {ACTION_CAP}")
    D = D_half * D_half
    keys = (strings[:, None] * D + nz[None, :] * D_half + strings[:, None]).ravel()
    amps = np.broadcast_to(vec[nz], (strings.size, nz.size)).ravel()
    keys, amps = _engine.evolve(keys, amps, circuit)
    tags, codes = keys // D, keys % D
    hit = codes % D_half == tags
    tags, codes, amps = tags[hit], codes[hit], amps[hit]
    out = np.zeros((M + 1, D_half), dtype=complex)
    counts = occupation_counts(M, d)
    np.add.at(out, (counts[tags], codes // D_half), w[tags] * amps)
    return out


def reduced_operator(circuit, weights=None, cap=REDUCED_CAP):
    """Materialised ``W``, refused above CR dimension ``cap``."""
    circuit = _as_circuit(circuit)
    M, D_half = _split(circuit)
    d = circuit.dim
    if D_half > cap:
        raise SizeCapError(f"CR dimension {D_half} exceeds cap {cap}")
    w = _string_weights(weights if weights is not None else WeightProfile.uniform(d - 1), M, d)
    strings = np.flatnonzero(w).astype(np.int64)
    cols = np.arange(D_half, dtype=np.int64)
    D = D_half * D_half
    tag = cols[:, None] * D_half + strings[None, :]
    keys = (tag * D + cols[:, None] * D_half + strings[None, :]).ravel()
    keys, amps = _engine.evolve(keys, np.ones(keys.size, dtype=complex), circuit)
    tags, codes = keys // D, keys % D
    hit = codes % D_half == tags % D_half
    tags, codes, amps = tags[hit], codes[hit], amps[hit]
    W = np.zeros((D_half, D_half), dtype=complex)
    np.add.at(W, (codes // D_half, tags // D_half), w[tags % D_half] * amps)
    return W


@dataclass(frozen=True, eq=False)
class PctcResult:
    """Postselected output.

    ``vector`` is the unnormalised ``W |psi>``, ``state`` its normalisation.
    ``components[k]`` is the part carried by ``k``-loop strings,
    ``weights[k] = <Phi^(k)|components[k]>`` and ``residuals[k]`` the norm
    of what that projection misses.
    """

    state: PureState
    vector: np.ndarray
    components: np.ndarray
    weights: np.ndarray
    residuals: np.ndarray

    @property
    def probabilities(self):
        p = np.abs(self.weights) ** 2
        return p / p.sum()


def pctc_output(spec, variant=None, sigma=None, c=None, norm_floor=1e-12):
    """Postselected output for the localised clock input.

    Parameters
    ----------
    spec : CircuitSpec
        Base circuit; a probabilistic variant replaces its swaps.
    variant : PctcVariant, optional
    sigma : PureState, optional
        CR input; defaults to the localised clock with weights ``c``.
    c : sequence of float, optional
        Localisation weights, uniform by default.

    Raises
    ------
    PostselectionError
        If ``W |psi>`` has norm below ``norm_floor``.
    """
    variant = variant or PctcVariant.standard()
    spec = variant.circuit_spec(spec)
    M, clock = spec.M, spec.clock
    if sigma is None:
        sigma = evolved_input(clock, M, 0, spec.dt, c)
    comps = reduced_action(build_circuit(spec), sigma, variant.profile(clock.levels))
    vector = comps.sum(axis=0)
    norm = np.linalg.norm(vector)
    if norm < norm_floor:
        raise PostselectionError(f"postselection annihilates the input (norm {norm:.3e})")
    weights = np.empty(M + 1, dtype=complex)
    residuals = np.empty(M + 1)
    for k in range(M + 1):
        ref = evolved_input(clock, M, k, spec.dt, c).amplitudes
        weights[k] = np.vdot(ref, comps[k])
        residuals[k] = np.linalg.norm(comps[k] - weights[k] * ref)
    state = PureState(vector / norm, M, clock.levels + 1)
    return PctcResult(state, vector, comps, weights, residuals)


def standard_weights(M):
    return np.array([_binomial.comb(M, k) for k in range(M + 1)], dtype=float)


def pctc_pmf(M):
    """``C(M, k)**2 / C(2M, M)``."""
    if M <= _binomial.EXACT_LIMIT:
        total = _binomial.comb(2 * M, M)
        return np.array([_binomial.comb(M, k) ** 2 / total for k in range(M + 1)])
    logs = np.array([2 * _binomial.log_comb(M, k) for k in range(M + 1)])
    return np.exp(logs - _binomial.log_comb(2 * M, M))


def pctc_probability(k, M):
    if not 0 <= k <= M:
        raise ValueError(f"k={k} outside 0..{M}")
    return float(pctc_pmf(M)[k])


def pctc_exact_pmf(M):
    total = _binomial.comb(2 * M, M)
    return [Fraction(_binomial.comb(M, k) ** 2, total) for k in range(M + 1)]


def pctc_expectation(M):
    """Mean loop count as an exact fraction."""
    return sum((k * p for k, p in enumerate(pctc_exact_pmf(M))), Fraction(0))


def incomplete_weights(M, N, h):
    """``C(M, k) h**(M-k) ((1-h)/N)**k``."""
    if not 0 <= h <= 1:
        raise ValueError(f"h must lie in [0, 1], got {h}")
    return _binomial.binomial_weights(M, h, (1 - h) / N)


def _normalized_squares(weights):
    p = np.abs(np.asarray(weights)) ** 2
    total = p.sum()
    if total == 0:
        raise PostselectionError("all output weights vanish")
    return p / total


def incomplete_pmf(M, N, h):
    if M > _binomial.EXACT_LIMIT and 0 < h < 1:
        # the squared weights underflow for large M; normalise in log space
        k = np.arange(M + 1)
        logs = np.array([_binomial.log_comb(M, int(i)) for i in k]) + k * np.log((1 - h) / (h * N))
        logs = 2 * logs
        return np.exp(logs - logs.max()) / np.exp(logs - logs.max()).sum()
    return _normalized_squares(incomplete_weights(M, N, h))


def incomplete_probability(k, M, N, h):
    if not 0 <= k <= M:
        raise ValueError(f"k={k} outside 0..{M}")
    return float(incomplete_pmf(M, N, h)[k])


def incomplete_output(spec, h, sigma=None, c=None):
    return pctc_output(spec, PctcVariant.incomplete(h), sigma, c)


def trace_evolution(clock, dt):
    """``tr R(dt)`` summed numerically over the clock levels."""
    return complex(evolution_phases(clock, dt).sum())


def probabilistic_weights(M, p, clock, dt=None):
    """Conjectured weights ``C(M, k) (alpha (1 + tr R) + beta)**(M-k) beta**k``."""
    if dt is None:
        dt = clock.t_perp
    alpha, beta = swap_amplitudes(p)
    stay = alpha * (1 + trace_evolution(clock, dt)) + beta
    k = np.arange(M + 1)
    coeffs = np.array([_binomial.comb(M, int(i)) for i in k], dtype=float)
    return coeffs * stay ** (M - k) * beta**k


def probabilistic_pmf(M, beta):
    """Normalised ``|C(M, k) beta**k|**2``."""
    beta = complex(beta)
    if M > _binomial.EXACT_LIMIT:
        if beta == 0:
            out = np.zeros(M + 1)
            out[0] = 1.0
            return out
        k = np.arange(M + 1)
        logs = 2 * (np.array([_binomial.log_comb(M, int(i)) for i in k]) + k * np.log(abs(beta)))
        return np.exp(logs - logs.max()) / np.exp(logs - logs.max()).sum()
    return _normalized_squares(_binomial.binomial_weights(M, 1.0, abs(beta)))


def conjectured_vector(M, p, clock, dt=None, c=None):
    weights = probabilistic_weights(M, p, clock, dt)
    return sum(w * evolved_input(clock, M, k, dt, c).amplitudes for k, w in enumerate(weights))


def probabilistic_output(spec, p, sigma=None, c=None):
    """Exact postselected output of the power-swap circuit."""
    return pctc_output(spec, PctcVariant.probabilistic(p), sigma, c)


@dataclass(frozen=True, eq=False)
class ConjectureReport:
    M: int
    p: float
    dt: float
    deviation: float
    exact: np.ndarray
    conjectured: np.ndarray


def verify_conjecture(M, p, dt=None, levels=None, c=None):
    """Compare the exact power-swap output with the conjectured closed form.

    Both sides are unnormalised CR vectors, so the comparison is
    independent of any loop-count readout.  ``levels`` defaults to
    ``max(2, M)``: a one-level clock returns to itself after ``t_perp``,
    so ``tr R`` would not vanish there.
    """
    if M > 3:
        raise SizeCapError("the exact conjecture check is limited to M <= 3")
    clock = ClockSpec(levels if levels is not None else max(2, M))
    spec = CircuitSpec(M, clock, dt=dt, swap_power=float(p))
    psi = evolved_input(clock, M, 0, spec.dt, c)
    exact = reduced_action(build_circuit(spec), psi).sum(axis=0)
    conj = conjectured_vector(M, p, clock, spec.dt, c)
    return ConjectureReport(M, float(p), spec.dt, float(np.abs(exact - conj).max()), exact, conj)


def telescoping_weights(M):
    """Weights after ``M`` separate wormholes, each taking ``Phi^(k)`` to ``Phi^(k) + Phi^(k+1)``."""
    w = np.ones(1)
    for _ in range(M):
        w = np.convolve(w, [1.0, 1.0])
    return w


def telescoping_output(clock, M, dt=None, c=None):
    """Apply ``1 + Rbar^(x M)`` once per wormhole to the localised input."""
    if dt is None:
        dt = clock.t_perp
    full = kron_all([vacuum_evolution_phases(clock, dt)] * M)
    v = evolved_input(clock, M, 0, dt, c).amplitudes
    for _ in range(M):
        v = v + full * v
    return v
