"""Constructors for the named gates of the Hardy interferometer circuits.

Angles are radians.  The coupling decomposition binds the phase-gate angle to
the coupling angle (lambda = phi): basis-state phase tracking shows the
five-step identity holds exactly, with no residual global phase, only under
that binding.
"""

from __future__ import annotations

import math

import numpy as np

from .statevector import Circuit, UnitaryMatrix, tensor


def u1(lam: float) -> UnitaryMatrix:
    """Phase gate diag(1, e^{i lam})."""
    return UnitaryMatrix([[1.0, 0.0], [0.0, np.exp(1j * lam)]])


def u3(theta: float, phi: float, lam: float) -> UnitaryMatrix:
    """General single-qubit rotation, standard hardware-gate convention.

    [[cos(t/2),            -e^{i lam} sin(t/2)      ],
     [e^{i phi} sin(t/2),   e^{i(phi+lam)} cos(t/2) ]]
    """
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return UnitaryMatrix(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ]
    )


def beam_splitter(theta: float) -> UnitaryMatrix:
    """Real rotation [[cos t, -sin t], [sin t, cos t]]; equals u3(2t, 0, 0)."""
    c = math.cos(theta)
    s = math.sin(theta)
    return UnitaryMatrix([[c, -s], [s, c]])


def phase_shifter(phi: float) -> UnitaryMatrix:
    """Phase shifter diag(1, e^{i phi}); same definition as u1."""
    return u1(phi)


def coupling(phi: float) -> UnitaryMatrix:
    """Two-qubit coupling diag(1, 1, 1, e^{2i phi}): phases only |11>."""
    return UnitaryMatrix(np.diag([1.0, 1.0, 1.0, np.exp(2j * phi)]))


def coupling_decomposed(phi: float) -> Circuit:
    """Five-step CNOT + phase-gate realization of coupling(phi).

    Steps (applied left to right): Id (x) u1(-lam), CNOT,
    u1(lam) (x) u1(-lam), CNOT, Id (x) u1(2 lam), on (Alice=qubit 1,
    Bob=qubit 0) with Alice the CNOT control.
    """
    lam = phi  # exact-identity binding
    cx = cnot(1, 0)
    steps = (
        (u1(-lam), (0,)),
        (cx, (1, 0)),
        (tensor(u1(lam), u1(-lam)), (1, 0)),
        (cx, (1, 0)),
        (u1(2.0 * lam), (0,)),
    )
    return Circuit(2, steps)


def cnot(control: int = 1, target: int = 0) -> UnitaryMatrix:
    """CNOT on two qubits; `control`/`target` name the gate's own bits."""
    if control == target:
        raise ValueError("control and target must differ")
    if {control, target} != {0, 1}:
        raise ValueError("control/target must be the gate bits 0 and 1")
    mat = np.zeros((4, 4), dtype=np.complex128)
    for basis in range(4):
        if (basis >> control) & 1:
            mat[basis ^ (1 << target), basis] = 1.0
        else:
            mat[basis, basis] = 1.0
    return UnitaryMatrix(mat)


def hadamard() -> UnitaryMatrix:
    h = 1.0 / math.sqrt(2.0)
    return UnitaryMatrix([[h, h], [h, -h]])


def pauli_x() -> UnitaryMatrix:
    return UnitaryMatrix([[0.0, 1.0], [1.0, 0.0]])


def identity() -> UnitaryMatrix:
    return UnitaryMatrix(np.eye(2))
