import functools

import numpy as np
import pytest
import scipy.sparse as sp


# filled by test_acceptance.report, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20211)


def random_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_unitary(rng, d):
    # QR of a complex Ginibre matrix with the R-diagonal phases divided out
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def kron_all(ops):
    # sparse so registers up to 4096 amplitudes stay cheap
    return functools.reduce(lambda a, b: sp.kron(a, b, format="csr"), ops)


def dense_single(dims, wire, u):
    ops = [np.eye(d) for d in dims]
    ops[wire] = u
    return kron_all(ops)


def dense_controlled(dims, control, target, u, powers=False):
    """Full register matrix of CU (trigger |1>) or, with ``powers``, of sum_k P_k (x) U^k."""
    total = sp.csr_matrix((int(np.prod(dims)),) * 2, dtype=complex)
    for k in range(dims[control]):
        ops = [np.eye(d) for d in dims]
        proj = np.zeros((dims[control],) * 2)
        proj[k, k] = 1.0
        ops[control] = proj
        if powers:
            ops[target] = np.linalg.matrix_power(u, k)
        elif k == 1:
            ops[target] = u
        total = total + kron_all(ops)
    return total


def brute_marginal(amplitudes, dims, wires):
    """Marginal by looping over every global index and decoding its digits."""
    out = {}
    for g, a in enumerate(amplitudes):
        digits = np.unravel_index(g, dims)
        key = tuple(int(digits[w]) for w in wires)
        out[key] = out.get(key, 0.0) + abs(a) ** 2
    return out


def random_density_data(rng, d, n_classes, n=30, real=False):
    """Random unit state rows and labels covering every class."""
    x = rng.normal(size=(n, d))
    if not real:
        x = x + 1j * rng.normal(size=(n, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y = np.concatenate([np.arange(n_classes), rng.integers(0, n_classes, n - n_classes)])
    return x, y
