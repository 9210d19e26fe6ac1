"""Quantum clocks on an equally spaced energy ladder.

A clock with ``N`` levels has energies ``E_n = E_1 + (n - 1) * dE`` and starts
in the uniform superposition of the energy states.  Evolving it by the
orthogonalisation time ``t_perp = 2 pi hbar / (N dE)`` produces an orthogonal
state, so ``N`` successive evolutions by ``t_perp`` give ``N`` mutually
orthogonal clock states.

Inside the circuit a mode may also be empty.  Mode index 0 is the vacuum and
indices 1..N are the clock levels, so single-mode operators are
``(N + 1) x (N + 1)``.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClockSpec:
    """Energy ladder of an ``levels``-level clock.

    ``base_energy`` defaults to ``spacing`` so that ``E_n = n * spacing``.  It
    only contributes a global phase to each single-clock sector.
    """

    levels: int
    spacing: float = 1.0
    base_energy: float | None = None
    hbar: float = 1.0

    def __post_init__(self):
        if int(self.levels) != self.levels or self.levels < 1:
            raise ValueError(f"levels must be a positive integer, got {self.levels!r}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")
        if self.base_energy is None:
            object.__setattr__(self, "base_energy", float(self.spacing))

    @property
    def energies(self):
        return self.base_energy + self.spacing * np.arange(self.levels)

    @property
    def t_perp(self):
        return orthogonalisation_time(self)


def orthogonalisation_time(spec):
    return 2 * np.pi * spec.hbar / (spec.levels * spec.spacing)


def evolution_phases(spec, dt):
    """Diagonal of ``R(dt)`` in the energy basis."""
    return np.exp(-1j * spec.energies * dt / spec.hbar)


def clock_state(spec, t):
    """The clock at time ``t``: ``exp(-i E_n t / hbar) / sqrt(N)`` in level ``n``."""
    return evolution_phases(spec, t) / np.sqrt(spec.levels)


def evolved_clock(spec, k, dt, t0=0.0):
    """``R(dt)^k`` applied to the clock at ``t0``."""
    return clock_state(spec, t0 + k * dt)


def overlap(spec, t, dt):
    r"""Closed-form overlap :math:`\langle\phi(t)|\phi(t+\Delta t)\rangle`.

    Evaluated as the geometric phase sum

    .. math::
        \frac{e^{-i E_1 \Delta t/\hbar}}{N}
        \sum_{n=1}^{N} \exp\left[-2\pi i \frac{n-1}{N}\frac{\Delta t}{t_\perp}\right]

    which does not depend on ``t``; the argument is kept for symmetry with
    the inner-product definition.
    """
    del t
    n = np.arange(spec.levels)
    ratio = dt / orthogonalisation_time(spec)
    terms = np.exp(-2j * np.pi * n * ratio / spec.levels)
    return complex(np.exp(-1j * spec.base_energy * dt / spec.hbar) * terms.sum() / spec.levels)


def evolution_operator(spec, dt):
    return np.diag(evolution_phases(spec, dt))


def vacuum_evolution_phases(spec, dt):
    """Diagonal of ``|0><0| + R(dt)`` on the vacuum-inclusive mode."""
    return np.concatenate(([1.0 + 0j], evolution_phases(spec, dt)))


def vacuum_evolution_operator(spec, dt):
    return np.diag(vacuum_evolution_phases(spec, dt))


def embed(clock_vector):
    """Place an ``N``-level clock vector into the vacuum-inclusive mode."""
    clock_vector = np.asarray(clock_vector, dtype=complex)
    return np.concatenate(([0j], clock_vector))
