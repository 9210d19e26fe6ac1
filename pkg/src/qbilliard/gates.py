"""Swap gates, clock evolution, and the looped-bundle circuit.

Gates are stored symbolically and in time order: ``circuit.gates[0]`` acts
first.  As an operator product the circuit is therefore
``U = g[-1] @ ... @ g[1] @ g[0]``.  For ``M = 2`` the stored order is::

    vacuum_swap 1 3, vacuum_swap 1 4, vacuum_swap 2 3, vacuum_swap 2 4,
    clock_evolution 3, clock_evolution 4

which is ``U_2 = (1 x 1 x R x R) S_24 S_23 S_14 S_13``.

Modes 1..M form the external (chronology-respecting, CR) bundle and modes
M+1..2M the looped (chronology-violating, CV) bundle.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import _engine
from .clock import ClockSpec, vacuum_evolution_phases
from .errors import SizeCapError
from .states import DensityOperator, PureState

MATERIALIZE_CAP = 4096

GATE_KINDS = ("swap", "vacuum_swap", "power_swap", "full_power_swap", "clock_evolution")

swap_amplitudes = _engine.swap_amplitudes


@dataclass(frozen=True)
class GateSpec:
    kind: str
    modes: tuple
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        modes = tuple(int(m) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        if self.kind == "clock_evolution":
            if len(modes) != 1 or modes[0] < 1:
                raise ValueError(f"clock_evolution needs one mode >= 1, got {modes}")
        elif len(modes) != 2 or not 1 <= modes[0] < modes[1]:
            raise ValueError(f"two-mode gate needs 1 <= i < j, got {modes}")


def _check_range(gate, n_modes):
    if n_modes is not None and max(gate.modes) > n_modes:
        raise ValueError(f"gate {gate} acts outside {n_modes} modes")
    return gate


def vacuum_swap(i, j, n_modes=None):
    """Exchange the clocks of modes ``i`` and ``j`` unless either is empty."""
    return _check_range(GateSpec("vacuum_swap", (i, j)), n_modes)


def power_swap(p, i, j, n_modes=None):
    """``alpha(p) * 1 + beta(p) * vacuum_swap(i, j)``."""
    return _check_range(GateSpec("power_swap", (i, j), float(p)), n_modes)


def full_power_swap(p, i, j, n_modes=None):
    """``alpha(p) * 1 + beta(p) * full_swap(i, j)``; moves a clock into an empty mode."""
    return _check_range(GateSpec("full_power_swap", (i, j), float(p)), n_modes)


def full_swap(i, j, n_modes=None):
    """Exchange the complete mode contents, vacuum included."""
    return _check_range(GateSpec("swap", (i, j)), n_modes)


def clock_evolution(mode, dt, n_modes=None):
    return _check_range(GateSpec("clock_evolution", (mode,), float(dt)), n_modes)


def gate_matrix(gate, clock):
    """Dense matrix of ``gate`` on its own modes (``d**2`` or ``d`` square)."""
    d = clock.levels + 1
    if gate.kind == "clock_evolution":
        return np.diag(vacuum_evolution_phases(clock, gate.param))
    perm = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            exchange = (a > 0 and b > 0) if gate.kind in ("vacuum_swap", "power_swap") else True
            src, dst = a * d + b, (b * d + a if exchange else a * d + b)
            perm[dst, src] = 1
    if gate.kind in ("power_swap", "full_power_swap"):
        alpha, beta = swap_amplitudes(gate.param)
        return alpha * np.eye(d * d) + beta * perm
    return perm


@dataclass(frozen=True)
class Circuit:
    n_modes: int
    clock: ClockSpec
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            _check_range(gate, self.n_modes)

    @property
    def dim(self):
        return self.clock.levels + 1


PLACEMENTS = ("before", "between", "after")
DISPERSION_GATES = ("power_swap", "full_power_swap")


@dataclass(frozen=True)
class CircuitSpec:
    """Parameters of the ``M``-mode circuit.

    ``dt`` is the loop delay; ``None`` means the clock's orthogonalisation
    time.  ``swap_power`` replaces every interaction swap by a power swap.
    ``dispersion_cr`` / ``dispersion_cv`` hold one power per neighbouring
    pair of the respective bundle; see ``dispersion_placement`` for where the
    gates go.
    """

    M: int
    clock: ClockSpec
    dt: float | None = None
    swap_power: float | None = None
    dispersion_cr: tuple = field(default=())
    dispersion_cv: tuple = field(default=())
    dispersion_placement: str = "before"
    dispersion_gate: str = "power_swap"

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")
        if self.clock.levels < self.M:
            raise ValueError(f"clock needs at least M={self.M} levels, has {self.clock.levels}")
        if self.dt is None:
            object.__setattr__(self, "dt", float(self.clock.t_perp))
        object.__setattr__(self, "dispersion_cr", tuple(float(p) for p in self.dispersion_cr))
        object.__setattr__(self, "dispersion_cv", tuple(float(p) for p in self.dispersion_cv))
        for name in ("dispersion_cr", "dispersion_cv"):
            if len(getattr(self, name)) not in (0, self.M - 1):
                raise ValueError(f"{name} needs M-1={self.M - 1} powers")
        if self.dispersion_placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}")
        if self.dispersion_gate not in DISPERSION_GATES:
            raise ValueError(f"dispersion gate must be one of {DISPERSION_GATES}")

    @property
    def dim(self):
        return self.clock.levels + 1

    def with_(self, **changes):
        return replace(self, **changes)


def _dispersion_gates(spec):
    M = spec.M
    gates = []
    for offset, powers in ((0, spec.dispersion_cr), (M, spec.dispersion_cv)):
        for m, p in enumerate(powers, start=1):
            if p != 0:
                gates.append(GateSpec(spec.dispersion_gate, (offset + m, offset + m + 1), p))
    return gates


def build_circuit(spec):
    """Gate sequence of ``U_M`` in application order."""
    M = spec.M
    blocks = []
    for m in range(1, M + 1):
        block = []
        for j in range(M + 1, 2 * M + 1):
            if spec.swap_power is None:
                block.append(vacuum_swap(m, j))
            else:
                block.append(power_swap(spec.swap_power, m, j))
        blocks.append(block)
    dispersion = _dispersion_gates(spec)
    gates = []
    if spec.dispersion_placement == "before":
        gates += dispersion
    for index, block in enumerate(blocks):
        gates += block
        if index == 0 and spec.dispersion_placement == "between":
            gates += dispersion
    if spec.dispersion_placement == "after":
        gates += dispersion
    gates += [clock_evolution(j, spec.dt) for j in range(M + 1, 2 * M + 1)]
    return Circuit(2 * M, spec.clock, gates)


def materialize(circuit, cap=MATERIALIZE_CAP):
    """Dense unitary of a circuit, refused above ``cap`` dimensions."""
    D = circuit.dim**circuit.n_modes
    if D > cap:
        raise SizeCapError(f"circuit dimension {D} exceeds materialisation cap {cap}")
    return _engine.evolve_columns(circuit, np.eye(D, dtype=complex))


def circuit_unitary(spec, cap=MATERIALIZE_CAP):
    return materialize(build_circuit(spec), cap)


def apply_gates(state, circuit):
    """Apply a circuit to a pure state, density operator or raw vector.

    Density operators are conjugated, ``U rho U^dagger``, by two column
    passes and never touch a materialised ``U``.
    """
    if isinstance(state, PureState):
        _check_dims(state, circuit)
        return PureState(_apply_vector(state.amplitudes, circuit), state.num_modes, state.dim)
    if isinstance(state, DensityOperator):
        _check_dims(state, circuit)
        left = _engine.evolve_columns(circuit, state.matrix)
        both = _engine.evolve_columns(circuit, left.conj().T).conj().T
        return DensityOperator(both, state.num_modes, state.dim)
    vector = np.asarray(state, dtype=complex)
    if vector.shape != (circuit.dim**circuit.n_modes,):
        raise ValueError(f"vector of shape {vector.shape} does not match the circuit")
    return _apply_vector(vector, circuit)


def _check_dims(state, circuit):
    if state.num_modes != circuit.n_modes or state.dim != circuit.dim:
        raise ValueError(
            f"state has {state.num_modes} modes of dim {state.dim}, circuit "
            f"{circuit.n_modes} of dim {circuit.dim}"
        )


def _apply_vector(vector, circuit):
    idx = np.flatnonzero(vector)
    keys, amps = _engine.evolve(idx.astype(np.int64), vector[idx], circuit)
    out = np.zeros_like(vector)
    out[keys] = amps
    return out


def format_circuit(circuit):
    c = circuit.clock
    lines = [
        f"# modes={circuit.n_modes} levels={c.levels} spacing={c.spacing!r} "
        f"base_energy={c.base_energy!r} hbar={c.hbar!r}"
    ]
    for g in circuit.gates:
        if g.kind == "clock_evolution":
            lines.append(f"{g.kind} {g.modes[0]} - {g.param!r}")
        else:
            lines.append(f"{g.kind} {g.modes[0]} {g.modes[1]} {g.param!r}")
    return "\n".join(lines) + "\n"


def parse_circuit(text):
    meta = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            items = dict(item.split("=", 1) for item in line[1:].split() if "=" in item)
            if "modes" in items:
                meta = items
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 'kind i j param', got {raw!r}")
        kind, i, j, param = parts
        try:
            modes = (int(i),) if j == "-" else (int(i), int(j))
            gates.append(GateSpec(kind, modes, float(param)))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if meta is None:
        raise ValueError("missing '# modes=... levels=...' header")
    clock = ClockSpec(
        int(meta["levels"]),
        float(meta["spacing"]),
        float(meta["base_energy"]),
        float(meta["hbar"]),
    )
    return Circuit(int(meta["modes"]), clock, gates)
