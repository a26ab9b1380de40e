"""
Dense state-vector simulation of multi-qudit registers.

Wire 0 is the leftmost factor of the tensor product and the most significant
digit of the mixed-radix global index, so ``|a>|b>`` on dims ``(d0, d1)`` lives
at global index ``a * d1 + b``.

Gates never build full register matrices: the amplitude vector is viewed as a
tensor with one axis per wire and each gate contracts (or slices) only the
axes it touches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "UNITARY_ATOL",
    "NORM_ATOL",
    "QuditState",
    "Gate",
    "ShiftPower",
    "Unitary",
    "ControlledUnitary",
    "GeneralizedControlledPower",
    "Circuit",
    "shift_matrix",
    "check_unitary",
    "init_register",
    "apply_shift_power",
    "apply_unitary",
    "apply_controlled_unitary",
    "apply_generalized_controlled_power",
    "run_circuit",
    "marginal_probabilities",
    "measure_probabilities",
    "sample_measurement",
]

UNITARY_ATOL = 1e-9
NORM_ATOL = 1e-9

WireInit = Union[int, Sequence[complex], np.ndarray, "QuditState"]


@dataclass(frozen=True)
class QuditState:
    """Pure state of a register of qudits.

    ``amplitudes`` is stored as a read-only complex128 vector of length
    ``prod(dims)``.
    """

    dims: Tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise ValueError(f"every wire dimension must be >= 2, got {dims}")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != int(np.prod(dims)):
            raise ValueError(
                f"expected {int(np.prod(dims))} amplitudes for dims {dims}, got {amps.size}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_wires(self) -> int:
        return len(self.dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per wire (a read-only view)."""
        return self.amplitudes.reshape(self.dims)

    def amplitude(self, *indices: int) -> complex:
        return complex(self.tensor()[tuple(indices)])

    def _with(self, tensor: np.ndarray) -> "QuditState":
        return QuditState(self.dims, tensor.reshape(-1))


def shift_matrix(d: int, m: int = 1) -> np.ndarray:
    """Matrix of ``X^m`` on a ``d``-level system: ``X^m|i> = |i + m mod d>``."""
    return np.roll(np.eye(d, dtype=np.complex128), m % d, axis=0)


def check_unitary(u: np.ndarray, dim: int | None = None, atol: float = UNITARY_ATOL) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be a square matrix, got shape {u.shape}")
    if dim is not None and u.shape[0] != dim:
        raise ValueError(f"unitary is {u.shape[0]}x{u.shape[0]}, wire dimension is {dim}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err >= atol:
        raise ValueError(f"matrix is not unitary: max|U^dag U - I| = {err:.3e}")
    return u


def _check_wire(state: QuditState, wire: int) -> int:
    if not 0 <= wire < state.n_wires:
        raise IndexError(f"wire {wire} out of range for a {state.n_wires}-wire register")
    return wire


def _check_pair(state: QuditState, control: int, target: int):
    _check_wire(state, control)
    _check_wire(state, target)
    if control == target:
        raise ValueError(f"control and target must differ (both are wire {control})")


def _contract(tensor: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    # u acts on `axis`; tensordot moves the new axis to the front, so put it back
    out = np.tensordot(u, tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def init_register(dims: Sequence[int], initial: Sequence[WireInit] | None = None) -> QuditState:
    """Product state ``initial[0] (x) initial[1] (x) ...``.

    Each entry of ``initial`` is either a basis index or an explicit
    normalized state vector of the wire's dimension. Missing ``initial``
    means ``|0...0>``.
    """
    dims = [int(d) for d in dims]
    if initial is None:
        initial = [0] * len(dims)
    if len(initial) != len(dims):
        raise ValueError(f"{len(dims)} wires but {len(initial)} initial states")
    amps = np.ones(1, dtype=np.complex128)
    for wire, (d, init) in enumerate(zip(dims, initial)):
        if isinstance(init, QuditState):
            init = init.amplitudes
        if isinstance(init, (int, np.integer)):
            if not 0 <= init < d:
                raise ValueError(f"basis index {init} out of range for wire {wire} (d={d})")
            vec = np.zeros(d, dtype=np.complex128)
            vec[init] = 1.0
        else:
            vec = np.asarray(init, dtype=np.complex128).reshape(-1)
            if vec.size != d:
                raise ValueError(f"wire {wire} has dimension {d}, state has {vec.size}")
            norm = np.linalg.norm(vec)
            if abs(norm - 1.0) > NORM_ATOL:
                raise ValueError(f"state for wire {wire} is not normalized (norm={norm!r})")
        amps = np.kron(amps, vec)
    return QuditState(tuple(dims), amps)


def apply_shift_power(state: QuditState, wire: int, m: int) -> QuditState:
    """Apply ``X^m`` to ``wire``; ``m`` may be negative."""
    _check_wire(state, wire)
    return state._with(np.roll(state.tensor(), int(m), axis=wire))


def apply_unitary(state: QuditState, wire: int, u: np.ndarray) -> QuditState:
    _check_wire(state, wire)
    u = check_unitary(u, state.dims[wire])
    return state._with(_contract(state.tensor(), u, wire))


def apply_controlled_unitary(
    state: QuditState, control: int, target: int, u: np.ndarray
) -> QuditState:
    """Apply ``u`` to ``target`` on the branch where ``control`` is ``|1>``."""
    _check_pair(state, control, target)
    u = check_unitary(u, state.dims[target])
    out = state.tensor().copy()
    index = [slice(None)] * state.n_wires
    index[control] = 1
    index = tuple(index)
    # the control axis is dropped by the integer index
    axis = target - (target > control)
    out[index] = _contract(out[index], u, axis)
    return state._with(out)


def apply_generalized_controlled_power(
    state: QuditState, control: int, target: int, u: np.ndarray
) -> QuditState:
    """Apply ``u**k`` to ``target`` on the branch where ``control`` is ``|k>``."""
    _check_pair(state, control, target)
    u = check_unitary(u, state.dims[target])
    out = state.tensor().copy()
    axis = target - (target > control)
    index = [slice(None)] * state.n_wires
    power = np.eye(u.shape[0], dtype=np.complex128)
    # k = 0 is the identity branch
    for k in range(1, state.dims[control]):
        power = u @ power
        index[control] = k
        out[tuple(index)] = _contract(out[tuple(index)], power, axis)
    return state._with(out)


class Gate:
    """A gate application on specific wires of a register."""

    def wires(self) -> Tuple[int, ...]:
        raise NotImplementedError

    def apply(self, state: QuditState) -> QuditState:
        raise NotImplementedError

    def _validate(self, dims: Sequence[int]):
        for w in self.wires():
            if not 0 <= w < len(dims):
                raise IndexError(f"{self!r} touches wire {w}, register has {len(dims)} wires")


@dataclass(frozen=True)
class ShiftPower(Gate):
    """``X^m`` on one wire."""

    wire: int
    m: int

    def wires(self):
        return (self.wire,)

    def apply(self, state):
        return apply_shift_power(state, self.wire, self.m)


def _frozen_unitary(obj, attr: str):
    u = check_unitary(getattr(obj, attr)).copy()
    u.flags.writeable = False
    object.__setattr__(obj, attr, u)


@dataclass(frozen=True, eq=False)
class Unitary(Gate):
    wire: int
    matrix: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        _frozen_unitary(self, "matrix")

    def wires(self):
        return (self.wire,)

    def _validate(self, dims):
        super()._validate(dims)
        check_unitary(self.matrix, dims[self.wire])

    def apply(self, state):
        return apply_unitary(state, self.wire, self.matrix)


@dataclass(frozen=True, eq=False)
class ControlledUnitary(Gate):
    """``CU``: ``matrix`` on ``target`` when ``control`` is ``|1>``."""

    control: int
    target: int
    matrix: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("control and target must differ")
        _frozen_unitary(self, "matrix")

    def wires(self):
        return (self.control, self.target)

    def _validate(self, dims):
        super()._validate(dims)
        check_unitary(self.matrix, dims[self.target])

    def apply(self, state):
        return apply_controlled_unitary(state, self.control, self.target, self.matrix)


@dataclass(frozen=True, eq=False)
class GeneralizedControlledPower(Gate):
    """``CU^k``: ``matrix**k`` on ``target`` when ``control`` is ``|k>``."""

    control: int
    target: int
    matrix: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("control and target must differ")
        _frozen_unitary(self, "matrix")

    def wires(self):
        return (self.control, self.target)

    def _validate(self, dims):
        super()._validate(dims)
        check_unitary(self.matrix, dims[self.target])

    def apply(self, state):
        return apply_generalized_controlled_power(state, self.control, self.target, self.matrix)


@dataclass
class Circuit:
    """Ordered gate list over a register of fixed dimensions."""

    dims: Tuple[int, ...]
    gates: List[Gate] = field(default_factory=list)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        for gate in self.gates:
            gate._validate(self.dims)

    def append(self, gate: Gate) -> "Circuit":
        gate._validate(self.dims)
        self.gates.append(gate)
        return self

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


def run_circuit(circuit: Circuit, initial: QuditState) -> QuditState:
    if tuple(initial.dims) != tuple(circuit.dims):
        raise ValueError(f"circuit dims {circuit.dims} do not match state dims {initial.dims}")
    state = initial
    for gate in circuit.gates:
        state = gate.apply(state)
    if abs(state.norm - 1.0) > 1e-10:
        raise ArithmeticError(f"norm drifted to {state.norm!r} after running the circuit")
    return state


def _check_wire_subset(state: QuditState, wires: Sequence[int]) -> Tuple[int, ...]:
    wires = tuple(int(w) for w in wires)
    if not wires:
        raise ValueError("at least one wire must be measured")
    if len(set(wires)) != len(wires):
        raise ValueError(f"measured wires must be distinct, got {wires}")
    for w in wires:
        _check_wire(state, w)
    return wires


def marginal_probabilities(state: QuditState, wires: Sequence[int]) -> np.ndarray:
    """Exact marginal distribution of ``wires`` as an array indexed by outcome.

    Axis ``i`` of the result corresponds to ``wires[i]``.
    """
    wires = _check_wire_subset(state, wires)
    probs = np.abs(state.tensor()) ** 2
    rest = tuple(w for w in range(state.n_wires) if w not in wires)
    if rest:
        probs = probs.sum(axis=rest)
    # remaining axes are in ascending wire order; reorder to the requested order
    kept = sorted(wires)
    return np.transpose(probs, [kept.index(w) for w in wires])


def measure_probabilities(state: QuditState, wires: Sequence[int]) -> Dict[Tuple[int, ...], float]:
    """Map from outcome tuple to exact probability, for every possible outcome."""
    probs = marginal_probabilities(state, wires)
    return {tuple(int(i) for i in idx): float(p) for idx, p in np.ndenumerate(probs)}


def sample_measurement(
    state: QuditState, wires: Sequence[int], shots: int, seed: int
) -> Dict[Tuple[int, ...], int]:
    """Seeded multinomial draw of ``shots`` outcomes; zero counts are omitted."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    probs = marginal_probabilities(state, wires)
    flat = probs.reshape(-1)
    flat = flat / flat.sum()
    counts = np.random.default_rng(seed).multinomial(shots, flat)
    return {
        tuple(int(i) for i in np.unravel_index(k, probs.shape)): int(c)
        for k, c in enumerate(counts)
        if c
    }
