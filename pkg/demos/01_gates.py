"""Qudit gates on a small register.

Walks through the shift gate, a controlled unitary and the generalized
controlled power on two qutrits, printing the state after each step.
"""
import numpy as np

from quditqmc.sim import (
    Circuit,
    ControlledUnitary,
    GeneralizedControlledPower,
    ShiftPower,
    init_register,
    measure_probabilities,
    run_circuit,
    shift_matrix,
)

np.set_printoptions(precision=3, suppress=True)


def show(label, state):
    nonzero = {idx: round(p, 4) for idx, p in measure_probabilities(state, (0, 1)).items() if p > 1e-12}
    print(f"{label:<34} {nonzero}")


# The shift X^m adds m to a digit modulo d.
print(shift_matrix(3, 1).real)

# Start in |0>|2> and shift wire 0 once.
state = init_register((3, 3), [0, 2])
show("|0>|2>", state)
state = run_circuit(Circuit((3, 3), [ShiftPower(0, 1)]), state)
show("after X on wire 0", state)

# A controlled unitary only fires when the control reads |1>.
# Here the target gets X^-1, so |1>|2> -> |1>|1>.
cu = ControlledUnitary(0, 1, shift_matrix(3, -1))
state = run_circuit(Circuit((3, 3), [cu]), state)
show("after CU(X^-1), control |1>", state)

# The generalized controlled power applies U^k when the control is |k>.
# Put the control in an equal superposition to see all three branches.
control = np.ones(3) / np.sqrt(3)
state = init_register((3, 3), [0, control])
power = GeneralizedControlledPower(1, 0, shift_matrix(3, -1))
state = run_circuit(Circuit((3, 3), [power]), state)
show("|0> (x) uniform, then C(X^-1)^k", state)
# branch k leaves the target at -k mod 3
