"""Dense statevector simulator: state allocation, gate matrices, and gate application.

Conventions used throughout the package:

* Qubit 0 is the most significant bit of the basis-state index, so the
  amplitude array of an n-qubit state reshaped to ``[2] * n`` has qubit q
  on axis q.
* Gates act in place on the amplitude array through strided views; the
  full 2^n x 2^n unitary is never materialized (tests build it separately
  as an independent oracle).
* Global phase is kept as-is; observable quantities (probabilities,
  sampled counts) are phase-insensitive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 24

_SQRT2_INV = 1.0 / math.sqrt(2.0)


class GateKind(enum.Enum):
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    H = "h"
    CNOT = "cnot"
    RXX = "rxx"
    RYY = "ryy"
    RZZ = "rzz"
    CRX = "crx"
    CRY = "cry"
    CRZ = "crz"


PARAMETERIZED_KINDS = frozenset(
    {GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RXX, GateKind.RYY,
     GateKind.RZZ, GateKind.CRX, GateKind.CRY, GateKind.CRZ}
)
TWO_QUBIT_KINDS = frozenset(
    {GateKind.CNOT, GateKind.RXX, GateKind.RYY, GateKind.RZZ, GateKind.CRX,
     GateKind.CRY, GateKind.CRZ}
)
#: Controlled rotations have a 0 eigenvalue in their generator, which changes
#: the exact gradient rule (see training.controlled_shift_gradient).
CONTROLLED_ROTATION_KINDS = frozenset({GateKind.CRX, GateKind.CRY, GateKind.CRZ})


@dataclass(frozen=True)
class GateMatrix:
    """A 2x2 or 4x4 unitary together with its kind and (optional) angle."""

    kind: GateKind
    angle: float | None
    elements: np.ndarray

    @property
    def num_qubits(self) -> int:
        return 1 if self.elements.shape[0] == 2 else 2


@dataclass
class StateVector:
    """Dense complex amplitudes for ``num_qubits`` qubits (length 2^n)."""

    num_qubits: int
    amplitudes: np.ndarray

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result of measuring one qubit: exact P(0) plus optional shot counts."""

    zero_probability: float
    counts: dict[int, int] | None
    shots: int


def init_state(num_qubits: int) -> StateVector:
    """Allocate the all-|0> state. ``num_qubits`` must be in [1, 24]."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(
            f"num_qubits must be between 1 and {MAX_QUBITS}, got {num_qubits}"
        )
    amps = np.zeros(2 ** num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def _rotation_1q(kind: GateKind, angle: float) -> np.ndarray:
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    if kind is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    # RZ: standard form diag(e^{-i t/2}, e^{+i t/2}).
    em = np.exp(-0.5j * angle)
    ep = np.exp(0.5j * angle)
    return np.array([[em, 0.0], [0.0, ep]], dtype=np.complex128)


def _rotation_2q(kind: GateKind, angle: float) -> np.ndarray:
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    if kind is GateKind.RXX:
        return np.array(
            [[c, 0, 0, -1j * s],
             [0, c, -1j * s, 0],
             [0, -1j * s, c, 0],
             [-1j * s, 0, 0, c]],
            dtype=np.complex128,
        )
    if kind is GateKind.RYY:
        return np.array(
            [[c, 0, 0, 1j * s],
             [0, c, -1j * s, 0],
             [0, -1j * s, c, 0],
             [1j * s, 0, 0, c]],
            dtype=np.complex128,
        )
    # RZZ: diag(e^{-i t/2}, e^{+i t/2}, e^{+i t/2}, e^{-i t/2}).
    em = np.exp(-0.5j * angle)
    ep = np.exp(0.5j * angle)
    return np.diag([em, ep, ep, em]).astype(np.complex128)


def gate_matrix(kind: GateKind, angle: float | None = None) -> GateMatrix:
    """Build the unitary for ``kind``.

    Parameterized kinds require ``angle`` (radians); H and CNOT reject one.
    Controlled rotations are block-diagonal with the control on the first
    (most significant) qubit of the pair: ``|0><0| (x) I + |1><1| (x) R``.
    """
    if kind in PARAMETERIZED_KINDS:
        if angle is None:
            raise ValueError(f"gate {kind.value} requires an angle")
    elif angle is not None:
        raise ValueError(f"gate {kind.value} does not take an angle")

    if kind is GateKind.H:
        mat = np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQRT2_INV
    elif kind is GateKind.CNOT:
        mat = np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
            dtype=np.complex128,
        )
    elif kind in (GateKind.RX, GateKind.RY, GateKind.RZ):
        mat = _rotation_1q(kind, angle)
    elif kind in (GateKind.RXX, GateKind.RYY, GateKind.RZZ):
        mat = _rotation_2q(kind, angle)
    else:  # CRX / CRY / CRZ
        inner = _rotation_1q(GateKind[kind.name[1:]], angle)
        mat = np.eye(4, dtype=np.complex128)
        mat[2:, 2:] = inner
    return GateMatrix(kind, angle, mat)


def _check_qubits(state: StateVector, qubits: tuple[int, ...]) -> None:
    for q in qubits:
        if not 0 <= q < state.num_qubits:
            raise IndexError(
                f"qubit index {q} out of range for {state.num_qubits}-qubit state"
            )
    if len(set(qubits)) != len(qubits):
        raise IndexError(f"qubit indices must be distinct, got {qubits}")


def apply_1q(state: StateVector, gate: GateMatrix, target: int) -> StateVector:
    """Apply a 2x2 unitary to ``target`` in place; returns the same state."""
    if gate.num_qubits != 1:
        raise ValueError(f"apply_1q needs a 2x2 gate, got {gate.kind.value}")
    _check_qubits(state, (target,))
    psi = state.amplitudes.reshape([2] * state.num_qubits)
    view = np.moveaxis(psi, target, 0)
    view[...] = (gate.elements @ view.reshape(2, -1)).reshape(view.shape)
    return state


def apply_2q(state: StateVector, gate: GateMatrix, q_a: int, q_b: int) -> StateVector:
    """Apply a 4x4 unitary on (q_a, q_b); q_a indexes the gate's first qubit."""
    if gate.num_qubits != 2:
        raise ValueError(f"apply_2q needs a 4x4 gate, got {gate.kind.value}")
    _check_qubits(state, (q_a, q_b))
    psi = state.amplitudes.reshape([2] * state.num_qubits)
    view = np.moveaxis(psi, (q_a, q_b), (0, 1))
    view[...] = (gate.elements @ view.reshape(4, -1)).reshape(view.shape)
    return state


def apply_cswap(state: StateVector, control: int, a: int, b: int) -> StateVector:
    """Swap wires a and b on the subspace where ``control`` is 1."""
    _check_qubits(state, (control, a, b))
    psi = state.amplitudes.reshape([2] * state.num_qubits)
    view = np.moveaxis(psi, (control, a, b), (0, 1, 2))
    tmp = view[1, 0, 1].copy()
    view[1, 0, 1] = view[1, 1, 0]
    view[1, 1, 0] = tmp
    return state


def zero_probability(state: StateVector, qubit: int) -> float:
    """Probability of measuring ``qubit`` as 0 in the Z basis."""
    _check_qubits(state, (qubit,))
    psi = state.amplitudes.reshape([2] * state.num_qubits)
    view = np.moveaxis(psi, qubit, 0)
    p = float(np.sum(np.abs(view[0]) ** 2))
    return min(max(p, 0.0), 1.0)


def sample(
    state: StateVector,
    qubit: int,
    shots: int,
    seed: int | np.random.Generator,
) -> MeasurementOutcome:
    """Draw ``shots`` Bernoulli outcomes for one qubit with a seeded generator."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p0 = zero_probability(state, qubit)
    zeros = int(rng.binomial(shots, p0))
    return MeasurementOutcome(p0, {0: zeros, 1: shots - zeros}, shots)
