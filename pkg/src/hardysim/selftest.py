"""Named invariant suites behind the `validate` CLI command.

Each suite returns (name, passed, detail).  The coupling suite accepts a
lambda scale purely as a negative-control hook for tests: any value other
than 1 breaks the phase-gate binding and must make the suite fail.
"""

from __future__ import annotations

import math

import numpy as np

from . import gates
from .hardy import (
    HardyParams,
    StateKind,
    analytic_q,
    classify_state,
    hardy_vector,
    optimal_angles,
    prepare_state,
    q_max,
)
from .statevector import Circuit, EXACT_TOL, VALIDATION_TOL, circuit_unitary, tensor

_RNG_SEED = 20240917


def _suite_gate_unitarity() -> tuple[str, bool, str]:
    rng = np.random.default_rng(_RNG_SEED)
    worst = 0.0
    for _ in range(50):
        theta, phi, lam = rng.uniform(-2 * math.pi, 2 * math.pi, 3)
        for gate in (
            gates.u1(lam),
            gates.u3(theta, phi, lam),
            gates.beam_splitter(theta),
            gates.phase_shifter(phi),
            gates.coupling(phi),
            gates.cnot(1, 0),
            gates.hadamard(),
            gates.pauli_x(),
            gates.identity(),
        ):
            defect = np.max(np.abs(gate.entries.conj().T @ gate.entries - np.eye(gate.dim)))
            det = abs(abs(np.linalg.det(gate.entries)) - 1.0)
            worst = max(worst, float(defect), float(det))
    return "gate-unitarity", worst <= VALIDATION_TOL, f"worst defect {worst:.2e}"


def _suite_beam_splitter_anchor() -> tuple[str, bool, str]:
    rng = np.random.default_rng(_RNG_SEED + 1)
    worst = 0.0
    for theta in rng.uniform(-2 * math.pi, 2 * math.pi, 200):
        diff = np.max(
            np.abs(gates.beam_splitter(theta).entries - gates.u3(2 * theta, 0.0, 0.0).entries)
        )
        worst = max(worst, float(diff))
    return "beam-splitter-anchor", worst <= EXACT_TOL, f"worst entry diff {worst:.2e}"


def _suite_coupling_identity(lambda_scale: float = 1.0) -> tuple[str, bool, str]:
    rng = np.random.default_rng(_RNG_SEED + 2)
    worst = 0.0
    for phi in rng.uniform(0.0, 2 * math.pi, 200):
        lam = phi * lambda_scale
        cx = gates.cnot(1, 0)
        circuit = Circuit(
            2,
            (
                (gates.u1(-lam), (0,)),
                (cx, (1, 0)),
                (tensor(gates.u1(lam), gates.u1(-lam)), (1, 0)),
                (cx, (1, 0)),
                (gates.u1(2 * lam), (0,)),
            ),
        )
        diff = np.max(np.abs(circuit_unitary(circuit) - gates.coupling(phi).entries))
        worst = max(worst, float(diff))
    detail = f"worst entry diff {worst:.2e}"
    if lambda_scale != 1.0:
        detail += f" (lambda scale {lambda_scale})"
    return "coupling-decomposition", worst <= EXACT_TOL, detail


def _grid_params(step_deg: float = 2.5):
    for theta_deg in np.arange(0.0, 90.0 + 1e-9, step_deg):
        for phi_deg in np.arange(0.0, 90.0 + 1e-9, step_deg):
            yield HardyParams.from_degrees(float(theta_deg), float(phi_deg))


def _suite_zero_probabilities() -> tuple[str, bool, str]:
    worst = 0.0
    for params in _grid_params():
        vec = hardy_vector(params)
        worst = max(worst, vec.p11_A1B1, vec.p1m1_A2B1, vec.pm11_A1B2)
    return "hardy-zero-probabilities", worst <= EXACT_TOL, f"worst residual {worst:.2e}"


def _suite_q_equivalence() -> tuple[str, bool, str]:
    worst = 0.0
    for params in _grid_params():
        pipeline = hardy_vector(params).p11_A2B2
        closed = analytic_q(params.theta, params.phi)
        worst = max(worst, abs(pipeline - closed))
    return "analytic-q-equivalence", worst <= VALIDATION_TOL, f"worst |diff| {worst:.2e}"


def _suite_classification() -> tuple[str, bool, str]:
    cases = [
        ((0.0, 37.0), StateKind.PS),
        ((63.0, 0.0), StateKind.PS),
        ((90.0, 55.0), StateKind.PS),
        ((45.0, 90.0), StateKind.MES),
        ((51.827, 51.827), StateKind.NMES),
        ((30.0, 60.0), StateKind.NMES),
    ]
    failures = []
    for (t, p), expected in cases:
        params = HardyParams.from_degrees(t, p)
        result = classify_state(params)
        # Independent concurrence check from the prepared amplitudes.
        a = prepare_state(params).amplitudes
        generic = 2.0 * abs(a[0] * a[3] - a[1] * a[2])
        if result.kind is not expected or abs(result.concurrence - generic) > VALIDATION_TOL:
            failures.append((t, p, result.kind.value, expected.value))
    return "state-classification", not failures, f"failures {failures}" if failures else "6 cases"


def _suite_optimum() -> tuple[str, bool, str]:
    theta_opt, phi_opt = optimal_angles()
    checks = [
        abs(analytic_q(theta_opt, phi_opt) - q_max()) <= VALIDATION_TOL,
        abs(math.cos(2 * theta_opt) - (2.0 - math.sqrt(5.0))) <= EXACT_TOL,
    ]
    # Coarse scan must not beat the claimed maximum.
    angles = np.radians(np.arange(0.0, 360.0, 0.25))
    diag = [analytic_q(a, a) for a in angles]
    checks.append(max(diag) <= q_max() + VALIDATION_TOL)
    ok = all(checks)
    return "q-maximum-location", ok, f"checks {checks}"


def run_validation_suites(coupling_lambda_scale: float = 1.0):
    """Run all suites; returns a list of (name, passed, detail)."""
    return [
        _suite_gate_unitarity(),
        _suite_beam_splitter_anchor(),
        _suite_coupling_identity(coupling_lambda_scale),
        _suite_zero_probabilities(),
        _suite_q_equivalence(),
        _suite_classification(),
        _suite_optimum(),
    ]
