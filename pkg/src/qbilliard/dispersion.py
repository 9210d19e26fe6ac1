"""Neighbour-pair dispersion gates and the invariance check.

Dispersion is modelled by power swaps between neighbouring modes inside the
CR bundle and inside the CV bundle.  The check compares the dispersive
circuit's outputs with the plain circuit:

* Deutsch (ECP with a product seed): trace distance of the CR outputs;
* postselected: overlap deficit ``1 - |<psi_base|psi_disp>|`` of the
  normalised CR outputs.

Each row also carries the largest change of the loop-count distribution.
"""

from dataclasses import dataclass

import numpy as np

from . import deutsch, pctc
from .errors import PostselectionError
from .states import evolved_input, trace_distance

PASS_THRESHOLD = 1e-10
PRESCRIPTIONS = ("dctc", "pctc")


def dispersive_circuit(spec, p_cr, p_cv, placement=None, gate=None):
    """Copy of ``spec`` with one power swap per neighbouring pair in each bundle."""
    p_cr, p_cv = tuple(p_cr), tuple(p_cv)
    for name, powers in (("CR", p_cr), ("CV", p_cv)):
        if len(powers) != spec.M - 1:
            raise ValueError(f"{name} bundle needs M-1={spec.M - 1} powers, got {len(powers)}")
    changes = {"dispersion_cr": p_cr, "dispersion_cv": p_cv}
    if placement is not None:
        changes["dispersion_placement"] = placement
    if gate is not None:
        changes["dispersion_gate"] = gate
    return spec.with_(**changes)


@dataclass(frozen=True)
class DispersionRow:
    M: int
    p: float
    prescription: str
    deviation: float
    distribution_deviation: float
    bundles: str
    placement: str
    gate: str

    @property
    def passed(self):
        return self.deviation < PASS_THRESHOLD


def _overlap_deficit(a, b):
    overlap = np.vdot(a, b)
    if overlap == 0:
        return 1.0
    phase = overlap / abs(overlap)
    return float(0.5 * np.linalg.norm(b - phase * a) ** 2)


def _dctc_outputs(spec, g):
    channel = deutsch.DeutschChannel(spec, evolved_input(spec.clock, spec.M, 0, spec.dt))
    result = deutsch.ecp_fixed_point(channel, deutsch.EcpSeed(g))
    cr = channel.cr(result.theta)
    return cr, deutsch.projective_pmf(cr, spec.clock, spec.dt)


def _pctc_outputs(spec):
    try:
        result = pctc.pctc_output(spec)
    except PostselectionError:
        return None, None
    probs = np.abs(result.weights) ** 2
    return result.state.amplitudes, probs / probs.sum()


def compare(base, disp, prescription, g=0.4):
    """``(deviation, distribution deviation)`` between two circuit specs."""
    if prescription == "dctc":
        (a, pa), (b, pb) = _dctc_outputs(base, g), _dctc_outputs(disp, g)
        return trace_distance(a, b), float(np.abs(pa - pb).max())
    if prescription == "pctc":
        (a, pa), (b, pb) = _pctc_outputs(base), _pctc_outputs(disp)
        if b is None:
            return 1.0, 1.0
        return _overlap_deficit(a, b), float(np.abs(pa - pb).max())
    raise ValueError(f"unknown prescription {prescription!r}; choose from {PRESCRIPTIONS}")


def dispersion_invariance_check(
    spec, p_values, prescriptions=PRESCRIPTIONS, g=0.4, bundles="both", placement=None, gate=None
):
    """Rows of ``(M, p, prescription, deviation, passed)``.

    Parameters
    ----------
    spec : CircuitSpec
        Base circuit.  The loop-count readout projects onto the evolved
        inputs, so use ``N > M`` for a non-degenerate distribution column.
    p_values : sequence of float
        Every neighbouring pair in the selected bundles gets the same power.
    bundles : {"both", "cr", "cv"}
    """
    if bundles not in ("both", "cr", "cv"):
        raise ValueError(f"bundles must be 'both', 'cr' or 'cv', got {bundles!r}")
    rows = []
    for p in p_values:
        powers = (float(p),) * (spec.M - 1)
        none = (0.0,) * (spec.M - 1)
        disp = dispersive_circuit(
            spec,
            powers if bundles in ("both", "cr") else none,
            powers if bundles in ("both", "cv") else none,
            placement,
            gate,
        )
        for prescription in prescriptions:
            dev, dist = compare(spec, disp, prescription, g)
            rows.append(
                DispersionRow(
                    spec.M, float(p), prescription, dev, dist, bundles,
                    disp.dispersion_placement, disp.dispersion_gate,
                )
            )
    return rows
