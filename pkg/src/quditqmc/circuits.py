"""
Prediction circuits for density estimation (two qudits) and classification
(three qudits), with readout of densities and class posteriors.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .density import DensityModel
from .sim import (
    Circuit,
    ControlledUnitary,
    GeneralizedControlledPower,
    QuditState,
    ShiftPower,
    Unitary,
    init_register,
    marginal_probabilities,
    run_circuit,
    sample_measurement,
    shift_matrix,
)

__all__ = [
    "DegenerateSampleError",
    "PredictionResult",
    "build_dmkde_circuit",
    "build_dmkdc_circuit",
    "prior_state",
    "dmkde_predict",
    "dmkdc_predict",
    "predict_batch",
    "THREADS_ENV",
]

THREADS_ENV = "QUDITQMC_THREADS"
DEGENERATE_FLOOR = 1e-300


class DegenerateSampleError(ArithmeticError):
    """Every class scored (numerically) zero, so no posterior exists."""


@dataclass(frozen=True, eq=False)
class PredictionResult:
    """Readout of one prediction circuit run.

    ``joint[j]`` is ``pi_j <psi|rho_j|psi>``; ``posterior`` is ``joint``
    normalized; ``label`` is the argmax, smallest index on ties. For a
    single-class model ``joint[0]`` is the density estimate.
    """

    joint: np.ndarray
    posterior: np.ndarray
    label: int

    @property
    def density(self) -> float:
        return float(self.joint.sum())


def _state_vector(model: DensityModel, psi) -> np.ndarray:
    if isinstance(psi, QuditState):
        if psi.dims != (model.dim,):
            raise ValueError(f"expected a single qudit of dimension {model.dim}, got dims {psi.dims}")
        return psi.amplitudes
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if v.size != model.dim:
        raise ValueError(f"state has dimension {v.size}, model has {model.dim}")
    return v


def build_dmkde_circuit(model: DensityModel) -> Circuit:
    """Two-qudit density-estimation circuit.

    Wire 0 carries ``|psi>`` and receives ``U^dag``; wire 1 starts in ``|0>``
    and receives ``U_lambda``; then ``C(X^-1)^k`` with control wire 1 and
    target wire 0. The probability of reading 0 on wire 0 is ``<psi|rho|psi>``.
    """
    if model.n_classes != 1:
        raise ValueError(f"density estimation needs a single-class model, got {model.n_classes} classes")
    d = model.dim
    cls = model.classes[0]
    return Circuit(
        (d, d),
        [
            Unitary(0, cls.eigenvectors.conj().T, label="U^dag"),
            Unitary(1, cls.u_lambda, label="U_lambda"),
            GeneralizedControlledPower(1, 0, shift_matrix(d, -1), label="X^-1"),
        ],
    )


def build_dmkdc_circuit(model: DensityModel) -> Circuit:
    """Three-qudit classification circuit.

    Wire 0 holds the class register, wire 1 the sample, wire 2 the
    eigenvalue register. Class ``j`` is rotated into the trigger position
    ``|1>`` of the controlled gates in turn: one ``X`` up front, then ``X^-1``
    between class blocks. A final shift undoes the accumulated rotation
    (``X^{D-2}``; omitted when it is the identity) and ``C(X^-1)^k`` with
    control wire 2 and target wire 1 finishes the circuit.
    """
    d, n_classes = model.dim, model.n_classes
    if n_classes > d:
        raise ValueError(f"{n_classes} classes do not fit in a qudit of dimension {d}")
    gates = [ShiftPower(0, 1)]
    offset = 1
    for j, cls in enumerate(model.classes):
        if j > 0:
            gates.append(ShiftPower(0, -1))
            offset -= 1
        gates.append(ControlledUnitary(0, 1, cls.eigenvectors.conj().T, label=f"U_{j}^dag"))
        gates.append(ControlledUnitary(0, 2, cls.u_lambda, label=f"U_lambda_{j}"))
    if offset % d:
        gates.append(ShiftPower(0, -offset))
    gates.append(GeneralizedControlledPower(2, 1, shift_matrix(d, -1), label="X^-1"))
    return Circuit((d, d, d), gates)


def prior_state(model: DensityModel) -> np.ndarray:
    """``sum_j sqrt(pi_j) |j>`` padded with zeros up to the qudit dimension."""
    amps = np.zeros(model.dim, dtype=np.complex128)
    amps[: model.n_classes] = np.sqrt(model.priors)
    return amps / np.linalg.norm(amps)


def _read_joint(state: QuditState, wires, n_classes: int, shots: Optional[int], seed: Optional[int]):
    if shots is None:
        probs = marginal_probabilities(state, wires)
    else:
        counts = sample_measurement(state, wires, shots, 0 if seed is None else seed)
        probs = np.zeros([state.dims[w] for w in wires])
        for outcome, c in counts.items():
            probs[outcome] = c / shots
    return probs


def dmkde_predict(
    model: DensityModel, psi, shots: Optional[int] = None, seed: Optional[int] = None
) -> float:
    """Density estimate ``<psi|rho|psi>`` read from wire 0 of the two-qudit circuit.

    With ``shots`` set, the probability is estimated from a seeded sample
    instead of read exactly.
    """
    v = _state_vector(model, psi)
    circuit = build_dmkde_circuit(model)
    out = run_circuit(circuit, init_register(circuit.dims, [v, 0]))
    return float(_read_joint(out, (0,), 1, shots, seed)[0])


def _posterior(joint: np.ndarray) -> PredictionResult:
    if np.all(joint < DEGENERATE_FLOOR):
        raise DegenerateSampleError("all class scores vanish; the sample cannot be classified")
    posterior = joint / joint.sum()
    # np.argmax returns the first maximum, i.e. the smallest class index on ties
    return PredictionResult(joint, posterior, int(np.argmax(joint)))


def dmkdc_predict(
    model: DensityModel, psi, shots: Optional[int] = None, seed: Optional[int] = None
) -> PredictionResult:
    v = _state_vector(model, psi)
    circuit = build_dmkdc_circuit(model)
    initial = init_register(circuit.dims, [prior_state(model), v, 0])
    out = run_circuit(circuit, initial)
    probs = _read_joint(out, (0, 1), model.n_classes, shots, seed)
    joint = np.array(probs[: model.n_classes, 0], dtype=np.float64)
    return _posterior(joint)


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def predict_batch(
    model: DensityModel,
    samples,
    method: Optional[str] = None,
    shots: Optional[int] = None,
    seed: Optional[int] = None,
    encoded: bool = False,
) -> List[PredictionResult]:
    """Run the prediction circuit for every sample, preserving order.

    ``method`` is ``"dmkde"`` or ``"dmkdc"``; by default single-class models
    use the two-qudit circuit and others the three-qudit one. ``samples`` are
    raw inputs for the model's feature map, or state vectors when
    ``encoded=True``. In shot mode sample ``i`` uses seed ``seed + i``.
    Set ``QUDITQMC_THREADS`` to spread samples over worker threads.
    """
    if method is None:
        method = "dmkde" if model.n_classes == 1 else "dmkdc"
    if method not in ("dmkde", "dmkdc"):
        raise ValueError(f"unknown method {method!r}")
    if len(samples) == 0:
        return []
    states = np.asarray(samples, dtype=np.complex128) if encoded else model.feature_map.transform(samples)
    states = np.atleast_2d(states)
    base = 0 if seed is None else seed

    def one(i: int) -> PredictionResult:
        s = None if shots is None else base + i
        if method == "dmkde":
            p = dmkde_predict(model, states[i], shots, s)
            return PredictionResult(np.array([p]), np.array([1.0]), 0)
        return dmkdc_predict(model, states[i], shots, s)

    threads = _thread_count()
    if threads == 1:
        return [one(i) for i in range(len(states))]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(one, range(len(states))))
