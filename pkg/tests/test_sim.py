import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    brute_marginal,
    dense_controlled,
    dense_single,
    random_state,
    random_unitary,
)
from quditqmc.sim import (
    Circuit,
    ControlledUnitary,
    GeneralizedControlledPower,
    QuditState,
    ShiftPower,
    Unitary,
    apply_controlled_unitary,
    apply_generalized_controlled_power,
    apply_shift_power,
    apply_unitary,
    init_register,
    marginal_probabilities,
    measure_probabilities,
    run_circuit,
    sample_measurement,
    shift_matrix,
)


def basis(dims, *idx):
    return init_register(dims, list(idx))


# --- register construction -------------------------------------------------

def test_init_all_zero():
    s = init_register([3, 3], [0, 0])
    expected = np.zeros(9)
    expected[0] = 1
    np.testing.assert_array_equal(s.amplitudes, expected)


def test_init_product_by_hand():
    plus = np.array([1, 1]) / np.sqrt(2)
    s = init_register([2, 2], [plus, 1])
    np.testing.assert_allclose(s.amplitudes, [0, 1 / np.sqrt(2), 0, 1 / np.sqrt(2)], atol=1e-15)


def test_init_matches_kron_oracle(rng):
    from quditqmc.features import SoftmaxMap, make_anchor_grid

    fmap = SoftmaxMap(make_anchor_grid([(0, 1), (0, 1)], (3, 3)), 2.0)
    psi = fmap([0.3, 0.8])
    s = init_register([9, 9], [psi, 0])
    assert s.amplitudes.size == 81
    assert abs(s.norm - 1) < 1e-12
    np.testing.assert_allclose(s.amplitudes, np.kron(psi.amplitudes, np.eye(9)[0]), atol=0)


def test_wire_order_leftmost_is_most_significant():
    s = basis((3, 4), 2, 1)
    assert np.argmax(np.abs(s.amplitudes)) == 2 * 4 + 1


@pytest.mark.parametrize(
    "dims, initial",
    [
        ([3, 3], [0]),
        ([3, 3], [3, 0]),
        ([3, 3], [np.ones(2) / np.sqrt(2), 0]),
        ([2, 2], [np.array([1.0, 1.0]), 0]),
    ],
)
def test_init_errors(dims, initial):
    with pytest.raises(ValueError):
        init_register(dims, initial)


def test_state_is_immutable():
    s = basis((2, 2), 0, 0)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


# --- shift gate -------------------------------------------------------------

def test_shift_increment_wraps():
    out = apply_shift_power(basis((3,), 2), 0, 1)
    np.testing.assert_array_equal(out.amplitudes, basis((3,), 0).amplitudes)


def test_shift_minus_one_wraps():
    out = apply_shift_power(basis((5,), 0), 0, -1)
    np.testing.assert_array_equal(out.amplitudes, basis((5,), 4).amplitudes)


def test_shift_twice_equals_m4_equals_identity(rng):
    s = QuditState((4,), random_state(rng, 4))
    twice = apply_shift_power(apply_shift_power(s, 0, 2), 0, 2)
    once = apply_shift_power(s, 0, 4)
    np.testing.assert_allclose(twice.amplitudes, once.amplitudes, atol=1e-15)
    np.testing.assert_allclose(once.amplitudes, s.amplitudes, atol=1e-15)


def test_shift_matrix_action():
    for d in (2, 3, 7):
        for m in range(-2 * d, 2 * d + 1):
            x = shift_matrix(d, m)
            for i in range(d):
                assert np.argmax(x[:, i]) == (i + m) % d


def test_shift_wire_out_of_range():
    with pytest.raises(IndexError):
        apply_shift_power(basis((2, 2), 0, 0), 2, 1)


@settings(max_examples=60, deadline=None)
@given(d=st.integers(2, 16), m=st.integers(-32, 32), seed=st.integers(0, 2**32 - 1))
def test_shift_inverse_property(d, m, seed):
    m = max(-2 * d, min(2 * d, m))
    rng = np.random.default_rng(seed)
    s = QuditState((d, 3), random_state(rng, 3 * d))
    back = apply_shift_power(apply_shift_power(s, 0, m), 0, -m)
    np.testing.assert_allclose(back.amplitudes, s.amplitudes, atol=1e-12)


# --- single-wire unitary ----------------------------------------------------

def test_unitary_identity(rng):
    s = QuditState((3, 2), random_state(rng, 6))
    np.testing.assert_array_equal(apply_unitary(s, 1, np.eye(2)).amplitudes, s.amplitudes)


def test_unitary_bitflip():
    out = apply_unitary(basis((2,), 0), 0, shift_matrix(2, 1))
    np.testing.assert_array_equal(out.amplitudes, basis((2,), 1).amplitudes)


@pytest.mark.parametrize("wire", [0, 1])
def test_unitary_matches_kron_oracle(rng, wire):
    dims = (3, 4)
    u = random_unitary(rng, dims[wire])
    s = QuditState(dims, random_state(rng, 12))
    expected = dense_single(dims, wire, u) @ s.amplitudes
    np.testing.assert_allclose(apply_unitary(s, wire, u).amplitudes, expected, atol=1e-13)


def test_unitary_rejects_non_unitary():
    with pytest.raises(ValueError):
        apply_unitary(basis((2,), 0), 0, np.array([[1, 1], [0, 1]]))


def test_unitary_rejects_wrong_size():
    with pytest.raises(ValueError):
        apply_unitary(basis((2,), 0), 0, np.eye(3))


# --- controlled unitary -----------------------------------------------------

def test_cu_not_triggered(rng):
    psi = random_state(rng, 3)
    s = init_register([3, 3], [0, psi])
    out = apply_controlled_unitary(s, 0, 1, random_unitary(rng, 3))
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


def test_cu_triggered_shift():
    out = apply_controlled_unitary(basis((3, 3), 1, 0), 0, 1, shift_matrix(3, 1))
    np.testing.assert_array_equal(out.amplitudes, basis((3, 3), 1, 1).amplitudes)


def test_cu_matches_displayed_formula(rng):
    d = 4
    u = random_unitary(rng, d)
    s = QuditState((d, d), random_state(rng, d * d))
    expected = dense_controlled((d, d), 0, 1, u) @ s.amplitudes
    np.testing.assert_allclose(apply_controlled_unitary(s, 0, 1, u).amplitudes, expected, atol=1e-13)


def test_cu_errors(rng):
    s = basis((2, 2), 0, 0)
    with pytest.raises(ValueError):
        apply_controlled_unitary(s, 0, 0, np.eye(2))
    with pytest.raises(ValueError):
        apply_controlled_unitary(s, 0, 1, 2 * np.eye(2))
    with pytest.raises(ValueError):
        ControlledUnitary(1, 1, np.eye(2))


# --- generalized controlled power -------------------------------------------

def test_gcp_worked_example():
    d = 3
    out = apply_generalized_controlled_power(basis((d, d), 2, 2), 0, 1, shift_matrix(d, -1))
    np.testing.assert_array_equal(out.amplitudes, basis((d, d), 2, 0).amplitudes)


def test_gcp_control_zero_is_identity(rng):
    s = init_register([4, 4], [0, random_state(rng, 4)])
    out = apply_generalized_controlled_power(s, 0, 1, shift_matrix(4, -1))
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


@pytest.mark.parametrize("d", range(2, 10))
def test_gcp_subtraction_rule_all_basis_states(d):
    x_inv = shift_matrix(d, -1)
    for i in range(d):
        for j in range(d):
            out = apply_generalized_controlled_power(basis((d, d), i, j), 0, 1, x_inv)
            np.testing.assert_array_equal(out.amplitudes, basis((d, d), i, (j - i) % d).amplitudes)


@pytest.mark.parametrize("control, target", [(0, 1), (1, 0), (2, 0), (0, 2)])
def test_gcp_matches_dense_oracle(rng, control, target):
    dims = (3, 3, 3)
    u = random_unitary(rng, 3)
    s = QuditState(dims, random_state(rng, 27))
    expected = dense_controlled(dims, control, target, u, powers=True) @ s.amplitudes
    out = apply_generalized_controlled_power(s, control, target, u)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)


def test_gcp_mixed_dimensions(rng):
    dims = (4, 2)
    u = random_unitary(rng, 2)
    s = QuditState(dims, random_state(rng, 8))
    expected = dense_controlled(dims, 0, 1, u, powers=True) @ s.amplitudes
    np.testing.assert_allclose(apply_generalized_controlled_power(s, 0, 1, u).amplitudes, expected, atol=1e-12)


def multiplexer_sequence(state, control, target, u):
    """CU^k from trigger-1 CU gates and shifts: for each k, rotate |k> onto |1>, apply CU(U^k), rotate back."""
    d = state.dims[control]
    for k in range(1, d):
        state = apply_shift_power(state, control, 1 - k)
        state = apply_controlled_unitary(state, control, target, np.linalg.matrix_power(u, k))
        state = apply_shift_power(state, control, k - 1)
    return state


@settings(max_examples=40, deadline=None)
@given(d=st.integers(2, 7), seed=st.integers(0, 2**32 - 1), swap=st.booleans())
def test_gcp_equals_multiplexer_sequence(d, seed, swap):
    rng = np.random.default_rng(seed)
    control, target = (1, 0) if swap else (0, 1)
    u = random_unitary(rng, d)
    s = QuditState((d, d), random_state(rng, d * d))
    direct = apply_generalized_controlled_power(s, control, target, u)
    seq = multiplexer_sequence(s, control, target, u)
    np.testing.assert_allclose(direct.amplitudes, seq.amplitudes, atol=1e-12)


# --- algebraic invariants over all gate kinds -------------------------------

def _gates(rng, dims):
    return [
        ShiftPower(0, 2),
        ShiftPower(len(dims) - 1, -3),
        Unitary(1, random_unitary(rng, dims[1])),
        ControlledUnitary(0, 1, random_unitary(rng, dims[1])),
        ControlledUnitary(len(dims) - 1, 0, random_unitary(rng, dims[0])),
        GeneralizedControlledPower(1, 0, random_unitary(rng, dims[0])),
        GeneralizedControlledPower(0, len(dims) - 1, shift_matrix(dims[-1], -1)),
    ]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dims=st.sampled_from([(2, 2), (3, 5), (4, 3, 2), (5, 5, 5)]))
def test_norm_and_linearity(seed, dims):
    rng = np.random.default_rng(seed)
    n = int(np.prod(dims))
    s1, s2 = random_state(rng, n), random_state(rng, n)
    alpha, beta = 0.6, 0.8j
    mix = alpha * s1 + beta * s2
    mix /= np.linalg.norm(mix)
    scale = 1 / np.linalg.norm(alpha * s1 + beta * s2)
    for gate in _gates(rng, dims):
        a = gate.apply(QuditState(dims, s1)).amplitudes
        b = gate.apply(QuditState(dims, s2)).amplitudes
        out = gate.apply(QuditState(dims, mix))
        assert abs(out.norm - 1) < 1e-12
        np.testing.assert_allclose(out.amplitudes, scale * (alpha * a + beta * b), atol=1e-12)


@pytest.mark.parametrize("dims", [(2, 3, 4), (8, 8), (4, 4, 4, 4), (16, 16, 16)])
def test_slice_application_equals_dense_matrix(rng, dims):
    assert np.prod(dims) <= 4096
    s = QuditState(dims, random_state(rng, int(np.prod(dims))))
    n = len(dims)
    for control, target in [(0, n - 1), (n - 1, 0), (1, 0)]:
        u = random_unitary(rng, dims[target])
        np.testing.assert_allclose(
            apply_controlled_unitary(s, control, target, u).amplitudes,
            dense_controlled(dims, control, target, u) @ s.amplitudes,
            atol=1e-12,
        )
        np.testing.assert_allclose(
            apply_generalized_controlled_power(s, control, target, u).amplitudes,
            dense_controlled(dims, control, target, u, powers=True) @ s.amplitudes,
            atol=1e-12,
        )


# --- circuits ---------------------------------------------------------------

def test_empty_circuit(rng):
    s = QuditState((3, 3), random_state(rng, 9))
    assert run_circuit(Circuit((3, 3)), s) is s


def test_inverse_pair_circuit(rng):
    s = QuditState((5, 2), random_state(rng, 10))
    out = run_circuit(Circuit((5, 2), [ShiftPower(0, 1), ShiftPower(0, -1)]), s)
    np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-15)


def test_circuit_equals_sequential_application(rng):
    d = 5
    u, ul = random_unitary(rng, d), random_unitary(rng, d)
    gates = [Unitary(0, u), Unitary(1, ul), GeneralizedControlledPower(1, 0, shift_matrix(d, -1))]
    s = init_register([d, d], [random_state(rng, d), 0])
    manual = apply_unitary(s, 0, u)
    manual = apply_unitary(manual, 1, ul)
    manual = apply_generalized_controlled_power(manual, 1, 0, shift_matrix(d, -1))
    np.testing.assert_allclose(run_circuit(Circuit((d, d), gates), s).amplitudes, manual.amplitudes, atol=1e-15)


def test_circuit_validates_wires():
    with pytest.raises(IndexError):
        Circuit((2, 2), [ShiftPower(2, 1)])
    with pytest.raises(ValueError):
        Circuit((2, 3), [Unitary(0, np.eye(3))])
    with pytest.raises(ValueError):
        run_circuit(Circuit((2, 2)), basis((2, 3), 0, 0))


# --- measurement ------------------------------------------------------------

def test_measure_basis():
    assert measure_probabilities(basis((2, 2), 0, 0), [0]) == {(0,): 1.0, (1,): 0.0}


def test_measure_bell_marginal():
    s = QuditState((2, 2), np.array([1, 0, 0, 1]) / np.sqrt(2))
    probs = measure_probabilities(s, [0])
    assert probs[(0,)] == pytest.approx(0.5, abs=1e-15)
    assert probs[(1,)] == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("wires", [[0, 1], [1, 0], [2], [0, 2], [2, 1, 0]])
def test_measure_matches_brute_force(rng, wires):
    dims = (3, 4, 2)
    amps = random_state(rng, 24)
    probs = measure_probabilities(QuditState(dims, amps), wires)
    brute = brute_marginal(amps, dims, wires)
    assert probs.keys() == brute.keys()
    for key in probs:
        assert probs[key] == pytest.approx(brute[key], abs=1e-14)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-10)


def test_marginal_array_orientation(rng):
    dims = (2, 3)
    amps = random_state(rng, 6)
    arr = marginal_probabilities(QuditState(dims, amps), [1, 0])
    assert arr.shape == (3, 2)
    np.testing.assert_allclose(arr, (np.abs(amps.reshape(dims)) ** 2).T, atol=1e-15)


@pytest.mark.parametrize("wires", [[], [0, 0], [3]])
def test_measure_bad_wires(wires):
    with pytest.raises((ValueError, IndexError)):
        measure_probabilities(basis((2, 2), 0, 0), wires)


def test_sample_deterministic_state():
    assert sample_measurement(basis((3,), 0), [0], 100, seed=1) == {(0,): 100}


def test_sample_uniform_within_4_sigma():
    s = QuditState((4,), np.full(4, 0.5))
    shots = 10**6
    counts = sample_measurement(s, [0], shots, seed=7)
    sigma = np.sqrt(shots * 0.25 * 0.75)
    for k in range(4):
        assert abs(counts[(k,)] - 250_000) < 4 * sigma


def test_sample_same_seed_same_counts(rng):
    s = QuditState((3, 3), random_state(rng, 9))
    assert sample_measurement(s, [0, 1], 500, 11) == sample_measurement(s, [0, 1], 500, 11)


def test_sample_requires_shots():
    with pytest.raises(ValueError):
        sample_measurement(basis((2,), 0), [0], 0, 1)
