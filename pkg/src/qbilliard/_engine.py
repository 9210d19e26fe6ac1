"""Gatewise evolution of tagged sparse batches.

The circuit never changes which modes are occupied, so a single-clock input
stays confined to a handful of basis states.  Each gate is applied to the
``(keys, amps)`` batch by the active kernel backend; see ``_kernels_py`` for
the key layout.
"""

import numpy as np

from . import _backend
from .clock import vacuum_evolution_phases


def swap_amplitudes(p):
    """``(alpha, beta)`` of the power swap ``alpha*I + beta*S``.

    Integer powers are snapped to the exact identity / exchange.
    """
    p = float(p)
    if p.is_integer():
        return (1 + 0j, 0j) if int(p) % 2 == 0 else (0j, 1 + 0j)
    phase = np.exp(-1j * np.pi * p)
    return complex((1 + phase) / 2), complex((1 - phase) / 2)


def stride(mode, n_modes, dim):
    return dim ** (n_modes - mode)


def evolve(keys, amps, circuit):
    """Apply ``circuit.gates`` in storage order to a tagged batch."""
    kern = _backend.kernels()
    n, d = circuit.n_modes, circuit.dim
    keys = np.ascontiguousarray(keys, dtype=np.int64)
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    for gate in circuit.gates:
        if gate.kind == "clock_evolution":
            (mode,) = gate.modes
            phases = np.ascontiguousarray(vacuum_evolution_phases(circuit.clock, gate.param))
            amps = kern.apply_phase(keys, amps, stride(mode, n, d), d, phases)
            continue
        i, j = gate.modes
        si, sj = stride(i, n, d), stride(j, n, d)
        if gate.kind == "vacuum_swap":
            keys, _ = kern.swap_digits(keys, si, sj, d, True)
        elif gate.kind == "swap":
            keys, _ = kern.swap_digits(keys, si, sj, d, False)
        elif gate.kind in ("power_swap", "full_power_swap"):
            alpha, beta = swap_amplitudes(gate.param)
            keep = gate.kind == "power_swap"
            keys, amps = kern.apply_power_swap(keys, amps, si, sj, d, alpha, beta, keep)
        else:  # pragma: no cover - GateSpec validates kinds
            raise ValueError(f"unknown gate kind {gate.kind!r}")
    return keys, amps


def evolve_columns(circuit, matrix):
    """``U @ matrix`` for a dense ``(D, K)`` matrix, one tag per column."""
    D = circuit.dim**circuit.n_modes
    matrix = np.asarray(matrix, dtype=complex)
    rows, cols = np.nonzero(matrix)
    keys = cols.astype(np.int64) * D + rows
    keys, amps = evolve(keys, matrix[rows, cols], circuit)
    out = np.zeros(matrix.shape, dtype=complex)
    out[keys % D, keys // D] = amps
    return out
