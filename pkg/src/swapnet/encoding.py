"""Classical-to-quantum data translation.

Two encodings share the same two-dimensions-per-qubit layout (RY for the
even dimension, RZ for the odd one):

* ``RAW_UNIT_INTERVAL`` maps a value x in [0, 1] to the angle 2*asin(sqrt(x)),
  so the encoded qubit's excited-state probability equals x.
* ``ARCTAN_UNBOUNDED`` maps an unbounded value v to atan(v) in (-pi/2, pi/2),
  used for tensor-network outputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import GateKind, StateVector, apply_1q, gate_matrix


class EncodingMode(enum.Enum):
    RAW_UNIT_INTERVAL = "raw"
    ARCTAN_UNBOUNDED = "arctan"


@dataclass(frozen=True)
class EncodingPlan:
    mode: EncodingMode
    qubits_used: int

    @classmethod
    def for_dimension(cls, dimension: int, mode: EncodingMode) -> "EncodingPlan":
        """Plan for a feature vector of even length ``dimension``."""
        if dimension < 2 or dimension % 2 != 0:
            raise ValueError(
                f"feature dimension must be even and >= 2, got {dimension}"
            )
        return cls(mode, dimension // 2)

    @property
    def dimension(self) -> int:
        return 2 * self.qubits_used


def angle_from_value(x: float) -> float:
    """Rotation angle 2*asin(sqrt(x)) in [0, pi] for x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"encoded value must lie in [0, 1], got {x}")
    return 2.0 * math.asin(math.sqrt(x))


def rotation_angles(features: np.ndarray, plan: EncodingPlan) -> np.ndarray:
    """Per-dimension rotation angles for ``features`` under ``plan``."""
    values = np.asarray(features, dtype=float)
    if values.ndim != 1 or values.shape[0] != plan.dimension:
        raise ValueError(
            f"expected {plan.dimension} features for {plan.qubits_used} qubits, "
            f"got shape {values.shape}"
        )
    if plan.mode is EncodingMode.ARCTAN_UNBOUNDED:
        return np.arctan(values)
    return np.array([angle_from_value(v) for v in values])


def apply_rotation_angles(
    state: StateVector, angles: np.ndarray, first_qubit: int
) -> StateVector:
    """Apply RY(angles[2k]) then RZ(angles[2k+1]) to qubit first_qubit + k."""
    if len(angles) % 2 != 0:
        raise ValueError(f"angle count must be even, got {len(angles)}")
    qubits_used = len(angles) // 2
    if first_qubit < 0 or first_qubit + qubits_used > state.num_qubits:
        raise ValueError(
            f"encoding qubits [{first_qubit}, {first_qubit + qubits_used}) exceed "
            f"{state.num_qubits}-qubit state"
        )
    for k in range(qubits_used):
        apply_1q(state, gate_matrix(GateKind.RY, angles[2 * k]), first_qubit + k)
        apply_1q(state, gate_matrix(GateKind.RZ, angles[2 * k + 1]), first_qubit + k)
    return state


def encode_features(
    state: StateVector,
    features: np.ndarray,
    first_qubit: int,
    plan: EncodingPlan,
) -> StateVector:
    """Write ``features`` onto ``plan.qubits_used`` qubits starting at ``first_qubit``."""
    return apply_rotation_angles(state, rotation_angles(features, plan), first_qubit)


@dataclass(frozen=True)
class NormalizationStats:
    """Per-dimension min/max, fitted on the training split and frozen."""

    minimum: np.ndarray
    maximum: np.ndarray

    @classmethod
    def fit(cls, raw: np.ndarray) -> "NormalizationStats":
        data = np.asarray(raw, dtype=float)
        if data.ndim != 2 or data.shape[0] == 0:
            raise ValueError("normalization needs a nonempty 2-D dataset")
        return cls(data.min(axis=0), data.max(axis=0))

    def apply(self, raw: np.ndarray) -> np.ndarray:
        """Min-max scale to [0, 1]; constant dimensions map to 0.

        Values outside the fitted range (possible on evaluation data) are
        clipped so downstream angle encoding stays in domain.
        """
        data = np.asarray(raw, dtype=float)
        span = self.maximum - self.minimum
        scaled = np.where(span > 0, (data - self.minimum) / np.where(span > 0, span, 1.0), 0.0)
        return np.clip(scaled, 0.0, 1.0)


def normalize_dataset(raw: np.ndarray) -> np.ndarray:
    """Min-max normalize each dimension of ``raw`` to [0, 1]."""
    stats = NormalizationStats.fit(raw)
    return stats.apply(raw)
