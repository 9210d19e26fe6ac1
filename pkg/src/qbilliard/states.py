"""Pure states and density operators over vacuum-inclusive modes.

Every mode has dimension ``dim = N + 1`` (index 0 is the vacuum).  A basis
state of ``n`` modes is a digit string ``(i_1, ..., i_n)`` encoded in mixed
radix with mode 1 as the most significant digit::

    index = i_1 * dim**(n-1) + i_2 * dim**(n-2) + ... + i_n

so ``np.kron(a, b)`` puts ``a`` on the leading modes.  Modes are numbered
from 1 in every public function, matching the gate labels.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .clock import clock_state, vacuum_evolution_phases


def basis_index(digits, dim):
    index = 0
    for digit in digits:
        if not 0 <= digit < dim:
            raise ValueError(f"digit {digit} out of range for dim {dim}")
        index = index * dim + int(digit)
    return index


def basis_digits(index, num_modes, dim):
    digits = []
    for _ in range(num_modes):
        index, digit = divmod(index, dim)
        digits.append(digit)
    if index:
        raise ValueError("index out of range")
    return tuple(reversed(digits))


@lru_cache(maxsize=64)
def digit_table(num_modes, dim):
    """``(dim**num_modes, num_modes)`` array of the digits of every basis index."""
    idx = np.arange(dim**num_modes)
    powers = dim ** np.arange(num_modes - 1, -1, -1)
    table = (idx[:, None] // powers[None, :]) % dim
    table.setflags(write=False)
    return table


def occupation_counts(num_modes, dim):
    """Number of non-vacuum modes for every basis index."""
    return (digit_table(num_modes, dim) > 0).sum(axis=1)


def occupation_patterns(num_modes, dim):
    """Binary occupation pattern of every basis index, encoded with mode 1 as MSB."""
    occupied = (digit_table(num_modes, dim) > 0).astype(np.int64)
    weights = 2 ** np.arange(num_modes - 1, -1, -1)
    return occupied @ weights


def kron_all(vectors):
    out = np.ones(1, dtype=complex)
    for v in vectors:
        out = np.kron(out, v)
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    num_modes: int
    dim: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.dim**self.num_modes,):
            raise ValueError(
                f"expected {self.dim**self.num_modes} amplitudes for {self.num_modes} modes "
                f"of dim {self.dim}, got shape {amps.shape}"
            )
        if self.dim < 2:
            raise ValueError("per-mode dimension must be at least 2")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        norm = self.norm
        if norm == 0:
            raise ZeroDivisionError("cannot normalise the zero vector")
        return PureState(self.amplitudes / norm, self.num_modes, self.dim)

    def density(self):
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()), self.num_modes, self.dim)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray
    num_modes: int
    dim: int

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        side = self.dim**self.num_modes
        if mat.shape != (side, side):
            raise ValueError(f"expected a {side}x{side} matrix, got shape {mat.shape}")
        object.__setattr__(self, "matrix", mat)

    @property
    def trace(self):
        return complex(np.trace(self.matrix))

    def validate(self, atol=1e-10, eig_floor=-1e-8):
        """Raise ``ValueError`` unless Hermitian, unit trace and PSD."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > atol:
            raise ValueError("density operator is not Hermitian")
        if abs(np.trace(m) - 1) > atol:
            raise ValueError(f"density operator has trace {np.trace(m)}")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < eig_floor:
            raise ValueError("density operator is not positive semidefinite")
        return self


@dataclass(frozen=True)
class WeightProfile:
    """Per-index weights for a postselection contraction: vacuum, then levels 1..N."""

    vacuum: float
    clock: tuple

    def __post_init__(self):
        object.__setattr__(self, "clock", tuple(float(w) for w in self.clock))
        if self.vacuum < 0 or any(w < 0 for w in self.clock):
            raise ValueError("weights must be nonnegative")

    @classmethod
    def uniform(cls, levels):
        return cls(1.0, (1.0,) * levels)

    @classmethod
    def incomplete(cls, h, levels):
        """Profile of the non-maximal Bell pair: ``h`` on vacuum, ``(1-h)/N`` per level."""
        if not 0 <= h <= 1:
            raise ValueError(f"h must lie in [0, 1], got {h}")
        return cls(h, ((1 - h) / levels,) * levels)

    def vector(self):
        return np.array((self.vacuum,) + self.clock)


def localized_input(clock_vector, c):
    """Single clock spread over ``M = len(c)`` modes with weights ``c``.

    Returns ``sum_m sqrt(c_m) |0>^(m-1) |phi> |0>^(M-m)``.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("c must be a non-empty vector")
    if np.any(c < 0) or abs(c.sum() - 1) > 1e-12:
        raise ValueError(f"localisation weights must be nonnegative and sum to 1, got {c}")
    phi = np.concatenate(([0j], np.asarray(clock_vector, dtype=complex)))
    dim = phi.size
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1
    M = c.size
    amps = np.zeros(dim**M, dtype=complex)
    for m in range(M):
        amps += np.sqrt(c[m]) * kron_all([phi if i == m else vac for i in range(M)])
    return PureState(amps, M, dim)


def apply_product_phase(state, phases, power=1):
    """Apply ``diag(phases)**power`` to every mode of a pure state."""
    diag = kron_all([np.asarray(phases) ** power] * state.num_modes)
    return PureState(diag * state.amplitudes, state.num_modes, state.dim)


def evolved_input(clock, M, k=0, dt=None, c=None):
    """Localised clock input with every mode evolved ``k`` times by ``dt``.

    ``c`` defaults to uniform weights and ``dt`` to the orthogonalisation
    time.  ``k = 0`` is the input itself.
    """
    if c is None:
        c = np.full(M, 1.0 / M)
    if len(c) != M:
        raise ValueError(f"need {M} localisation weights, got {len(c)}")
    if dt is None:
        dt = clock.t_perp
    base = localized_input(clock_state(clock, 0.0), c)
    return apply_product_phase(base, vacuum_evolution_phases(clock, dt), k)


def tensor(a, b):
    if a.dim != b.dim:
        raise ValueError(f"basis mismatch: dim {a.dim} vs {b.dim}")
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), a.num_modes + b.num_modes, a.dim)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(np.kron(a.matrix, b.matrix), a.num_modes + b.num_modes, a.dim)
    raise TypeError("tensor needs two pure states or two density operators")


def _check_modes(modes, num_modes):
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes) or any(not 1 <= m <= num_modes for m in modes):
        raise ValueError(f"invalid mode set {modes} for {num_modes} modes")
    return sorted(modes)


def _contract(matrix, num_modes, dim, modes, weights):
    t = np.asarray(matrix).reshape((dim,) * (2 * num_modes))
    n = num_modes
    for m in sorted(modes, reverse=True):
        axis = m - 1
        t = np.diagonal(t, axis1=axis, axis2=axis + n)
        t = t @ weights
        n -= 1
    side = dim**n
    return t.reshape(side, side)


def partial_trace(rho, modes_to_trace):
    modes = _check_modes(modes_to_trace, rho.num_modes)
    out = _contract(rho.matrix, rho.num_modes, rho.dim, modes, np.ones(rho.dim))
    return DensityOperator(out, rho.num_modes - len(modes), rho.dim)


def weighted_partial_trace(op, weights, num_modes, dim, traced_modes=None):
    r"""``sum_j w(j) <j| op |j>`` over basis strings ``j`` of ``traced_modes``.

    ``w(j)`` is the product of the per-index weights of ``j``.  The default
    traced set is the second half of the modes (the looped bundle).  With
    unit weights this is the ordinary partial trace.
    """
    if traced_modes is None:
        traced_modes = range(num_modes // 2 + 1, num_modes + 1)
    modes = _check_modes(traced_modes, num_modes)
    w = weights.vector() if isinstance(weights, WeightProfile) else np.asarray(weights, dtype=float)
    if w.shape != (dim,):
        raise ValueError(f"need {dim} weights, got {w.shape}")
    return _contract(op, num_modes, dim, modes, w)


def trace_distance(a, b):
    ma = a.matrix if isinstance(a, DensityOperator) else np.asarray(a)
    mb = b.matrix if isinstance(b, DensityOperator) else np.asarray(b)
    if ma.shape != mb.shape:
        raise ValueError(f"shape mismatch {ma.shape} vs {mb.shape}")
    diff = ma - mb
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def write_state(path, state, comment=None):
    """Write nonzero entries as ``index real imag`` rows.

    Density operators are written with the row-major flattened index.
    """
    data = state.amplitudes if isinstance(state, PureState) else state.matrix.ravel()
    kind = "pure" if isinstance(state, PureState) else "density"
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"# kind={kind} modes={state.num_modes} dim={state.dim}")
    for i in np.flatnonzero(data):
        lines.append(f"{i} {data[i].real:.17e} {data[i].imag:.17e}")
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def read_state(path):
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for item in line[1:].split():
                    if "=" in item:
                        key, value = item.split("=", 1)
                        meta[key] = value
                continue
            idx, re, im = line.split()
            rows.append((int(idx), float(re) + 1j * float(im)))
    n, dim = int(meta["modes"]), int(meta["dim"])
    side = dim**n
    if meta["kind"] == "pure":
        data = np.zeros(side, dtype=complex)
        for i, v in rows:
            data[i] = v
        return PureState(data, n, dim)
    data = np.zeros(side * side, dtype=complex)
    for i, v in rows:
        data[i] = v
    return DensityOperator(data.reshape(side, side), n, dim)
