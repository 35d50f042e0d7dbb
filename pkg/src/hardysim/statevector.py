"""Dense simulation core: pure states, density matrices, gates, and channels.

Basis convention (fixed, tests pin it): basis index k encodes the register
|q_{n-1} ... q_1 q_0> with qubit 0 as the least-significant bit of k.  In the
two-qubit experiments Alice is qubit 1 (high bit, CNOT control) and Bob is
qubit 0 (low bit, CNOT target), so k = 2*a + b for outcomes (a, b).

All objects are immutable after construction and every operation is a pure
function, so concurrent evaluation needs no coordination.
"""

from __future__ import annotations

import numpy as np

# Construction-time invariant checks use VALIDATION_TOL; exact-math
# assertions (decomposition identities etc.) use EXACT_TOL.
VALIDATION_TOL = 1e-10
EXACT_TOL = 1e-12

MAX_QUBITS = 5


def _as_complex_array(values, shape_hint: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    # isfinite on complex checks both components
    if not np.isfinite(arr).all():
        raise ValueError(f"non-finite entries in {shape_hint}")
    return arr


class StateVector:
    """Normalized pure state over 1..5 qubits."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes, num_qubits: int | None = None):
        amps = _as_complex_array(amplitudes, "state vector").reshape(-1)
        if num_qubits is None:
            num_qubits = max(amps.size.bit_length() - 1, 0)
        if amps.size != 2**num_qubits:
            raise ValueError(
                f"amplitude count {amps.size} is not 2**{num_qubits}"
            )
        if not 1 <= num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be 1..{MAX_QUBITS}, got {num_qubits}")
        norm = float(np.linalg.norm(amps))
        if norm < VALIDATION_TOL:
            raise ValueError("zero-norm state rejected")
        if abs(norm - 1.0) > VALIDATION_TOL:
            raise ValueError(f"state not normalized: |psi| = {norm!r}")
        amps = amps.copy()
        amps.setflags(write=False)
        self.num_qubits = num_qubits
        self.amplitudes = amps

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        """Computational basis state |index> on `num_qubits` qubits."""
        if not 0 <= index < 2**num_qubits:
            raise ValueError(f"basis index {index} out of range")
        amps = np.zeros(2**num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, num_qubits)

    def __repr__(self) -> str:
        return f"StateVector(n={self.num_qubits}, amplitudes={self.amplitudes!r})"


class UnitaryMatrix:
    """2x2 or 4x4 unitary, validated to U^dag U = I at construction."""

    __slots__ = ("dim", "entries")

    def __init__(self, entries):
        mat = _as_complex_array(entries, "unitary matrix")
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"unitary must be square, got shape {mat.shape}")
        dim = mat.shape[0]
        if dim not in (2, 4):
            raise ValueError(f"unitary dim must be 2 or 4, got {dim}")
        defect = np.max(np.abs(mat.conj().T @ mat - np.eye(dim)))
        if defect > VALIDATION_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
        mat = mat.copy()
        mat.setflags(write=False)
        self.dim = dim
        self.entries = mat

    @property
    def num_targets(self) -> int:
        return self.dim.bit_length() - 1

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch in unitary product")
        return UnitaryMatrix(self.entries @ other.entries)

    def __repr__(self) -> str:
        return f"UnitaryMatrix({self.entries!r})"


class DensityMatrix:
    """Hermitian, positive, trace-1 operator; carrier for noisy evolution."""

    __slots__ = ("num_qubits", "entries")

    def __init__(self, entries, num_qubits: int | None = None):
        mat = _as_complex_array(entries, "density matrix")
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got {mat.shape}")
        if num_qubits is None:
            num_qubits = max(mat.shape[0].bit_length() - 1, 0)
        if mat.shape[0] != 2**num_qubits or not 1 <= num_qubits <= MAX_QUBITS:
            raise ValueError(f"bad density matrix dimension {mat.shape[0]}")
        if np.max(np.abs(mat - mat.conj().T)) > VALIDATION_TOL:
            raise ValueError("density matrix is not Hermitian")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > VALIDATION_TOL:
            raise ValueError(f"density matrix trace {trace!r} != 1")
        if float(np.min(np.linalg.eigvalsh(mat))) < -1e-9:
            raise ValueError("density matrix has a negative eigenvalue")
        mat = mat.copy()
        mat.setflags(write=False)
        self.num_qubits = num_qubits
        self.entries = mat

    def probabilities(self) -> np.ndarray:
        """Diagonal of rho: computational-basis outcome probabilities."""
        return np.real(np.diag(self.entries)).copy()

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def __repr__(self) -> str:
        return f"DensityMatrix(n={self.num_qubits})"


class Circuit:
    """Ordered gate steps; step = (UnitaryMatrix, target qubit indices).

    Targets are listed most-significant gate bit first, so a 4x4 gate applied
    with targets (1, 0) uses qubit 1 as its own high bit.
    """

    __slots__ = ("num_qubits", "steps")

    def __init__(self, num_qubits: int, steps):
        if not 1 <= num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be 1..{MAX_QUBITS}")
        normalized = []
        for gate, targets in steps:
            targets = tuple(int(t) for t in targets)
            _check_targets(gate, targets, num_qubits)
            normalized.append((gate, targets))
        self.num_qubits = num_qubits
        self.steps = tuple(normalized)

    def gate_count(self) -> int:
        return len(self.steps)

    def __repr__(self) -> str:
        return f"Circuit(n={self.num_qubits}, steps={len(self.steps)})"


def _check_targets(gate: UnitaryMatrix, targets: tuple[int, ...], num_qubits: int):
    if gate.dim != 2 ** len(targets):
        raise ValueError(
            f"gate dim {gate.dim} does not match {len(targets)} target(s)"
        )
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits {targets}")
    for t in targets:
        if not 0 <= t < num_qubits:
            raise ValueError(f"target qubit {t} out of range for n={num_qubits}")


def apply_gate(state: StateVector, gate: UnitaryMatrix, targets) -> StateVector:
    """Apply `gate` to the listed qubits of `state`, identity elsewhere."""
    targets = tuple(int(t) for t in targets)
    n = state.num_qubits
    _check_targets(gate, targets, n)
    amps = state.amplitudes
    if n == 2:  # dominant case; avoids the moveaxis machinery
        mat = gate.entries
        if targets == (1,):
            out = (mat @ amps.reshape(2, 2)).reshape(-1)
        elif targets == (0,):
            out = (amps.reshape(2, 2) @ mat.T).reshape(-1)
        elif targets == (1, 0):
            out = mat @ amps
        else:  # (0, 1): gate's high bit sits on qubit 0
            swapped = amps.reshape(2, 2).T.reshape(-1)
            out = (mat @ swapped).reshape(2, 2).T.reshape(-1)
        return StateVector(out, 2)
    k = len(targets)
    # Axis for qubit q in the [2]*n tensor layout is (n-1-q).
    src = [n - 1 - q for q in targets]
    psi = np.moveaxis(amps.reshape([2] * n), src, range(k))
    shape = psi.shape
    out = (gate.entries @ psi.reshape(2**k, -1)).reshape(shape)
    out = np.moveaxis(out, range(k), src)
    return StateVector(out.reshape(-1), n)


def tensor(a: UnitaryMatrix, b: UnitaryMatrix) -> UnitaryMatrix:
    """Kronecker product of two 2x2 gates; `a` acts on the higher qubit."""
    if a.dim != 2 or b.dim != 2:
        raise ValueError("tensor expects two 2x2 unitaries")
    return UnitaryMatrix(np.kron(a.entries, b.entries))


def run_circuit(circuit: Circuit, initial: StateVector) -> StateVector:
    """Apply the circuit's steps to `initial` in order."""
    if circuit.num_qubits != initial.num_qubits:
        raise ValueError("circuit and state qubit counts differ")
    state = initial
    for gate, targets in circuit.steps:
        state = apply_gate(state, gate, targets)
    return state


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Compose all steps into one 2^n x 2^n matrix."""
    dim = 2**circuit.num_qubits
    full = np.eye(dim, dtype=np.complex128)
    for gate, targets in circuit.steps:
        full = embed_gate(gate.entries, targets, circuit.num_qubits) @ full
    return full


_SWAP_2Q = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)
_EYE_2 = np.eye(2, dtype=np.complex128)


def embed_gate(entries: np.ndarray, targets, num_qubits: int) -> np.ndarray:
    """Expand a gate on `targets` to the full 2^n register (identity elsewhere)."""
    targets = tuple(int(t) for t in targets)
    if num_qubits == 2:  # dominant case, avoid the bit loops
        if targets == (1,):
            return np.kron(entries, _EYE_2)
        if targets == (0,):
            return np.kron(_EYE_2, entries)
        if targets == (1, 0):
            return np.asarray(entries, dtype=np.complex128)
        if targets == (0, 1):
            return _SWAP_2Q @ entries @ _SWAP_2Q
    k = len(targets)
    dim = 2**num_qubits
    # Gate bit m (0 = least significant) lives on qubit targets[k-1-m].
    qubit_of_bit = tuple(reversed(targets))
    target_mask = sum(1 << q for q in targets)
    full = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        rest = col & ~target_mask
        sub_col = 0
        for m, q in enumerate(qubit_of_bit):
            sub_col |= ((col >> q) & 1) << m
        for sub_row in range(2**k):
            row = rest
            for m, q in enumerate(qubit_of_bit):
                row |= ((sub_row >> m) & 1) << q
            full[row, col] = entries[sub_row, sub_col]
    return full


def outcome_distribution(state: StateVector) -> np.ndarray:
    """Computational-basis probabilities p_k = |amplitude_k|^2."""
    return np.abs(state.amplitudes) ** 2


def to_density(state: StateVector) -> DensityMatrix:
    """rho = |psi><psi|."""
    return DensityMatrix(
        np.outer(state.amplitudes, state.amplitudes.conj()), state.num_qubits
    )


def apply_channel(rho: DensityMatrix, kraus, targets) -> DensityMatrix:
    """Apply the channel rho -> sum_k K rho K^dag on the listed qubits.

    The Kraus set must be complete (sum K^dag K = I) within VALIDATION_TOL.
    """
    targets = tuple(int(t) for t in targets)
    ops = [_as_complex_array(op, "Kraus operator") for op in kraus]
    if not ops:
        raise ValueError("empty Kraus set")
    sub_dim = 2 ** len(targets)
    completeness = np.zeros((sub_dim, sub_dim), dtype=np.complex128)
    for op in ops:
        if op.shape != (sub_dim, sub_dim):
            raise ValueError(f"Kraus operator shape {op.shape} != {(sub_dim, sub_dim)}")
        completeness += op.conj().T @ op
    if np.max(np.abs(completeness - np.eye(sub_dim))) > VALIDATION_TOL:
        raise ValueError("Kraus set is not trace preserving")
    n = rho.num_qubits
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"target qubit {t} out of range")
    out = np.zeros_like(rho.entries)
    for op in ops:
        full = embed_gate(op, targets, n)
        out += full @ rho.entries @ full.conj().T
    return DensityMatrix(out, n)
