import numpy as np
import pytest

from qbilliard import _backend


def embed_two_mode(local, i, j, n, d):
    """Dense operator of a two-mode gate on modes ``i < j`` of ``n`` modes."""
    others = [m for m in range(1, n + 1) if m not in (i, j)]
    order = [i, j] + others
    big = np.kron(local, np.eye(d ** len(others))).reshape((d,) * (2 * n))
    # axis a of `big` belongs to mode order[a]; move it back to natural order
    inv = [order.index(m) for m in range(1, n + 1)]
    big = big.transpose(inv + [n + a for a in inv])
    return big.reshape(d**n, d**n)


def embed_one_mode(diag, mode, n, d):
    mats = [np.diag(diag) if m == mode else np.eye(d) for m in range(1, n + 1)]
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out


def dense_unitary(circuit):
    """Kronecker-product oracle for a circuit, independent of the sparse engine."""
    from qbilliard.gates import gate_matrix

    n, d = circuit.n_modes, circuit.dim
    U = np.eye(d**n, dtype=complex)
    for gate in circuit.gates:
        local = gate_matrix(gate, circuit.clock)
        if gate.kind == "clock_evolution":
            G = embed_one_mode(np.diag(local), gate.modes[0], n, d)
        else:
            G = embed_two_mode(local, *gate.modes, n, d)
        U = G @ U
    return U


@pytest.fixture(params=_backend.available())
def backend(request):
    with _backend.use_backend(request.param):
        yield request.param
