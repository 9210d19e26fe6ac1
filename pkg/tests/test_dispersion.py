import numpy as np
import pytest

from qbilliard import dispersion, pctc
from qbilliard.clock import ClockSpec
from qbilliard.gates import CircuitSpec, build_circuit, swap_amplitudes


def base(M, N=None):
    return CircuitSpec(M, ClockSpec(N or M))


def test_gate_count_and_placement():
    spec = base(2)
    disp = dispersion.dispersive_circuit(spec, [0.3], [0.4])
    c0, c1 = build_circuit(spec), build_circuit(disp)
    assert len(c1.gates) == len(c0.gates) + 2
    assert [g.modes for g in c1.gates[:2]] == [(1, 2), (3, 4)]
    after = build_circuit(disp.with_(dispersion_placement="after"))
    assert [g.kind for g in after.gates[-4:-2]] == ["power_swap", "power_swap"]


def test_length_mismatch():
    with pytest.raises(ValueError):
        dispersion.dispersive_circuit(base(3), [0.3], [0.3, 0.3])


def test_zero_power_gives_exactly_zero():
    rows = dispersion.dispersion_invariance_check(base(2), [0.0])
    assert all(r.deviation == 0 and r.distribution_deviation == 0 for r in rows)
    assert all(r.passed for r in rows)


@pytest.mark.parametrize("p", [2.0, -4.0])
def test_even_powers_are_identity(p):
    rows = dispersion.dispersion_invariance_check(base(2), [p])
    assert all(r.deviation < 1e-14 for r in rows)


@pytest.mark.parametrize("gate", ["power_swap", "full_power_swap"])
@pytest.mark.parametrize("M", [2, 3])
def test_cr_bundle_dispersion_is_invisible(M, gate):
    # the CR bundle carries exactly one clock, so a vacuum-aware swap there
    # only changes amplitudes of states the input never populates
    rows = dispersion.dispersion_invariance_check(base(M), [0.37, 0.8], bundles="cr", gate=gate)
    assert max(r.deviation for r in rows) < 1e-10


def test_cv_bundle_dispersion_changes_the_output():
    rows = dispersion.dispersion_invariance_check(base(2), [0.37], bundles="cv")
    assert all(not r.passed for r in rows)


@pytest.mark.parametrize("p", [0.2, 0.37, 0.8, 1.0, 3.0])
def test_two_mode_cv_dispersion_scales_two_loop_weight(p):
    # A power swap between the empty CV modes acts only on the branch where
    # both hold a clock, multiplying the two-loop weight by alpha(p).
    # Odd p therefore removes the two-loop term: no mere relabelling.
    spec = dispersion.dispersive_circuit(base(2), [0.0], [p])
    res = pctc.pctc_output(spec)
    alpha, _ = swap_amplitudes(p)
    assert np.allclose(res.weights / res.weights[0], [1, 2, alpha], atol=1e-12)


def test_rows_shape():
    rows = dispersion.dispersion_invariance_check(base(2), [0.2, 0.8], prescriptions=("pctc",))
    assert [(r.M, r.p, r.prescription) for r in rows] == [(2, 0.2, "pctc"), (2, 0.8, "pctc")]
    assert rows[0].placement == "before" and rows[0].gate == "power_swap"
    with pytest.raises(ValueError):
        dispersion.dispersion_invariance_check(base(2), [0.2], bundles="all")
    with pytest.raises(ValueError):
        dispersion.compare(base(2), base(2), "mwi")
