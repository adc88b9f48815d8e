"""Trainable ansatz layers and the swap-test circuit.

Register layout on ``1 + 2m`` qubits (m = data_qubits = trained_qubits):
ancilla at index 0, data register on qubits ``1 .. m``, trained register on
qubits ``m+1 .. 2m``. Only the ancilla is ever measured.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    GateKind,
    StateVector,
    apply_1q,
    apply_2q,
    apply_cswap,
    gate_matrix,
    init_state,
    sample,
    zero_probability,
)
from .encoding import EncodingMode, EncodingPlan, rotation_angles, apply_rotation_angles

_H = gate_matrix(GateKind.H)


class LayerKind(enum.Enum):
    SINGLE_UNITARY = "single"
    DUAL_UNITARY = "dual"
    ENTANGLE_UNITARY = "entangle"


#: Gate kinds consumed by each layer style, in application order.
_LAYER_GATES = {
    LayerKind.SINGLE_UNITARY: (GateKind.RY, GateKind.RZ),
    LayerKind.DUAL_UNITARY: (GateKind.RYY, GateKind.RZZ),
    LayerKind.ENTANGLE_UNITARY: (GateKind.CRY, GateKind.CRZ),
}


@dataclass(frozen=True)
class CircuitSpec:
    """Ansatz layout: register sizes plus an ordered list of layer styles."""

    data_qubits: int
    trained_qubits: int
    layers: tuple[LayerKind, ...]

    def __post_init__(self):
        if self.data_qubits < 1 or self.trained_qubits < 1:
            raise ValueError("both registers need at least one qubit")
        if self.data_qubits != self.trained_qubits:
            raise ValueError(
                "swap-test pairing requires equal registers, got "
                f"{self.data_qubits} data vs {self.trained_qubits} trained"
            )
        if not self.layers:
            raise ValueError("layer list must be nonempty")
        object.__setattr__(self, "layers", tuple(LayerKind(l) for l in self.layers))

    @property
    def num_qubits(self) -> int:
        return 1 + self.data_qubits + self.trained_qubits

    @property
    def trained_register_start(self) -> int:
        return 1 + self.data_qubits


def layer_parameter_count(kind: LayerKind, register_qubits: int) -> int:
    """Parameters one layer consumes on a register of ``register_qubits``."""
    if kind is LayerKind.SINGLE_UNITARY:
        return 2 * register_qubits
    # Dual and entangle layers act on adjacent pairs, no wraparound.
    return 2 * (register_qubits - 1)


def parameter_count(spec: CircuitSpec) -> int:
    return sum(layer_parameter_count(k, spec.trained_qubits) for k in spec.layers)


def parameter_gate_kinds(spec: CircuitSpec) -> list[GateKind]:
    """Gate kind fed by each parameter index, in consumption order."""
    kinds: list[GateKind] = []
    for layer in spec.layers:
        g_a, g_b = _LAYER_GATES[layer]
        count = layer_parameter_count(layer, spec.trained_qubits) // 2
        for _ in range(count):
            kinds.extend((g_a, g_b))
    return kinds


def random_parameters(spec: CircuitSpec, rng: np.random.Generator) -> np.ndarray:
    """Initial angles: uniform draws from [0, pi)."""
    return rng.uniform(0.0, 1.0, parameter_count(spec)) * np.pi


def prepare_trained_state(
    spec: CircuitSpec,
    params: np.ndarray,
    state: StateVector,
    first_qubit: int | None = None,
) -> StateVector:
    """Apply the ansatz layers to the trained register.

    ``first_qubit`` defaults to the trained register's position inside the
    full swap-test state; pass 0 to drive a standalone register state.
    """
    params = np.asarray(params, dtype=float)
    expected = parameter_count(spec)
    if params.shape != (expected,):
        raise ValueError(
            f"expected {expected} parameters for {spec.layers}, got {params.shape}"
        )
    start = spec.trained_register_start if first_qubit is None else first_qubit
    m = spec.trained_qubits
    if start < 0 or start + m > state.num_qubits:
        raise ValueError(
            f"trained register [{start}, {start + m}) exceeds "
            f"{state.num_qubits}-qubit state"
        )
    it = iter(params)
    for layer in spec.layers:
        g_a, g_b = _LAYER_GATES[layer]
        if layer is LayerKind.SINGLE_UNITARY:
            for q in range(start, start + m):
                apply_1q(state, gate_matrix(g_a, next(it)), q)
                apply_1q(state, gate_matrix(g_b, next(it)), q)
        else:
            for q in range(start, start + m - 1):
                apply_2q(state, gate_matrix(g_a, next(it)), q, q + 1)
                apply_2q(state, gate_matrix(g_b, next(it)), q, q + 1)
    return state


def swap_test_from_angles(
    spec: CircuitSpec,
    params: np.ndarray,
    angles: np.ndarray,
    shots: int | None = None,
    rng: int | np.random.Generator | None = None,
) -> float:
    """Swap test with the data register driven by explicit rotation angles.

    This is the raw circuit all gradient rules differentiate through; the
    public entry point is :func:`swap_test`.
    """
    if len(angles) != 2 * spec.data_qubits:
        raise ValueError(
            f"expected {2 * spec.data_qubits} rotation angles, got {len(angles)}"
        )
    state = init_state(spec.num_qubits)
    apply_1q(state, _H, 0)
    apply_rotation_angles(state, angles, first_qubit=1)
    prepare_trained_state(spec, params, state)
    for i in range(spec.data_qubits):
        apply_cswap(state, 0, 1 + i, spec.trained_register_start + i)
    apply_1q(state, _H, 0)
    if shots is None:
        return zero_probability(state, 0)
    if rng is None:
        raise ValueError("shots mode requires a seed or Generator")
    outcome = sample(state, 0, shots, rng)
    return outcome.counts[0] / outcome.shots


def swap_test(
    spec: CircuitSpec,
    params: np.ndarray,
    features: np.ndarray,
    plan: EncodingPlan | None = None,
    shots: int | None = None,
    rng: int | np.random.Generator | None = None,
) -> float:
    """Probability that the ancilla reads the "identical states" outcome.

    Exact mode (``shots=None``) returns (1 + F)/2 where F is the squared
    overlap of the encoded data state and the prepared trained state, so the
    value lies in [0.5, 1]. Shots mode returns the seeded estimate, which
    can dip below 0.5 from statistical error.
    """
    if plan is None:
        plan = EncodingPlan.for_dimension(len(features), EncodingMode.RAW_UNIT_INTERVAL)
    if plan.qubits_used != spec.data_qubits:
        raise ValueError(
            f"plan encodes {plan.qubits_used} qubits but circuit has "
            f"{spec.data_qubits} data qubits"
        )
    angles = rotation_angles(features, plan)
    return swap_test_from_angles(spec, params, angles, shots=shots, rng=rng)


def mapped_fidelity(raw: float) -> float:
    """Map the swap-test output from [0.5, 1] to [0, 1].

    The max(0, .) clamp absorbs shot-noise readings below 0.5.
    """
    return max(0.0, (raw - 0.5) * 2.0)
