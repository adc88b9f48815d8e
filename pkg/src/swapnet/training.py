"""Losses, gradient rules, the sample-by-sample training loop, and heads.

Gradients flow by the chain rule through the cross-entropy head and the
[0.5, 1] -> [0, 1] fidelity mapping down to the raw swap-test output, which
is differentiated with shift rules evaluated on the circuit itself:

* plain rotation parameters (RY/RZ/RYY/RZZ and the encoding angles) are
  sinusoidal in the raw output, so the two-point rule at pi/2 is exact;
* controlled-rotation parameters carry an extra half-frequency component,
  so the default mode uses the exact four-evaluation rule instead;
* the epoch-decay mode applies the two-point rule at pi/(2*sqrt(epoch)) to
  every parameter, trading exactness for a shrinking search breadth.

Updates are per-sample: all gradients for one sample are evaluated at a
frozen parameter snapshot, then applied, quantum parameters first and the
tensor network last.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuit import (
    CircuitSpec,
    mapped_fidelity,
    parameter_count,
    parameter_gate_kinds,
    random_parameters,
    swap_test_from_angles,
)
from .core import CONTROLLED_ROTATION_KINDS
from .tensornet import MpsModel, feature_map, mps_backward, mps_forward

PROBABILITY_CLAMP = 1e-12

_COEF_NEAR = (math.sqrt(2.0) + 1.0) / (4.0 * math.sqrt(2.0))
_COEF_FAR = (math.sqrt(2.0) - 1.0) / (4.0 * math.sqrt(2.0))

CostFn = Callable[[np.ndarray], float]


class ShiftMode(enum.Enum):
    FIXED_HALF_PI = "fixed"
    EPOCH_DECAY = "decay"


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    epochs: int = 40
    shift_mode: ShiftMode = ShiftMode.FIXED_HALF_PI
    seed: int = 0
    mode: str = "exact"  # "exact" | "shots"
    shots: int = 8192
    update_all_circuits: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.mode not in ("exact", "shots"):
            raise ValueError(f"mode must be 'exact' or 'shots', got {self.mode!r}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        self.shift_mode = ShiftMode(self.shift_mode)


@dataclass(frozen=True)
class LossRecord:
    epoch: int
    mean_cost: float
    train_accuracy: float
    test_accuracy: float  # NaN when no held-out split was supplied


@dataclass
class ModelState:
    """One MPS plus one parameter vector per class circuit.

    Binary classification uses a single circuit whose mapped fidelity is the
    class-1 score; k-class classification uses k circuits of identical
    layout with independent parameters.
    """

    spec: CircuitSpec
    mps: MpsModel
    thetas: list[np.ndarray]
    classes: list[int]

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ValueError("need at least two classes")
        if sorted(self.classes) != list(self.classes):
            raise ValueError("classes must be listed in ascending order")
        want = 1 if len(self.classes) == 2 else len(self.classes)
        if len(self.thetas) != want:
            raise ValueError(
                f"{len(self.classes)} classes need {want} circuits, got {len(self.thetas)}"
            )
        expected = parameter_count(self.spec)
        for i, theta in enumerate(self.thetas):
            if theta.shape != (expected,):
                raise ValueError(f"circuit {i}: expected {expected} parameters")
        if self.mps.n_out != 2 * self.spec.data_qubits:
            raise ValueError(
                f"tensor network emits {self.mps.n_out} values but the circuit "
                f"encodes {2 * self.spec.data_qubits}"
            )

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def is_binary(self) -> bool:
        return len(self.classes) == 2


class TrainingDivergenceError(RuntimeError):
    """Raised when a non-finite cost or output shows up during training."""

    def __init__(self, message: str, epoch: int, sample_index: int):
        super().__init__(f"{message} (epoch {epoch}, sample {sample_index})")
        self.epoch = epoch
        self.sample_index = sample_index


def initialize_model(
    spec: CircuitSpec,
    num_sites: int,
    classes: Sequence[int],
    bond_dim: int = 4,
    seed: int = 0,
    noise: float = 0.01,
) -> ModelState:
    """Seeded fresh model: random circuit angles plus a near-identity MPS."""
    rng = np.random.default_rng(seed)
    classes = sorted(int(c) for c in classes)
    num_circuits = 1 if len(classes) == 2 else len(classes)
    thetas = [random_parameters(spec, rng) for _ in range(num_circuits)]
    mps = MpsModel.initialize(
        num_sites, 2 * spec.data_qubits, bond_dim=bond_dim, rng=rng, noise=noise
    )
    return ModelState(spec, mps, thetas, classes)


def binary_cost(p: float, y: int) -> float:
    """Cross-entropy of probability ``p`` against label ``y`` in {0, 1}."""
    p = min(max(p, PROBABILITY_CLAMP), 1.0 - PROBABILITY_CLAMP)
    return -y * math.log(p) - (1 - y) * math.log(1.0 - p)


def epoch_shift(epoch: int) -> float:
    """Decaying evaluation shift pi/(2*sqrt(epoch)); epochs are 1-based."""
    if epoch < 1:
        raise ValueError(f"epoch number must be >= 1, got {epoch}")
    return math.pi / (2.0 * math.sqrt(epoch))


def shift_gradient(cost_fn: CostFn, params: np.ndarray, index: int, shift: float) -> float:
    """Two-point rule 0.5*(f(theta+s) - f(theta-s)) on one coordinate."""
    up = np.array(params, dtype=float)
    down = up.copy()
    up[index] += shift
    down[index] -= shift
    return 0.5 * (cost_fn(up) - cost_fn(down))


def finite_difference_gradient(
    cost_fn: CostFn, params: np.ndarray, index: int, step: float
) -> float:
    """Central difference (f(theta+s) - f(theta-s)) / 2s; test oracle only."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    up = np.array(params, dtype=float)
    down = up.copy()
    up[index] += step
    down[index] -= step
    return (cost_fn(up) - cost_fn(down)) / (2.0 * step)


def controlled_shift_gradient(cost_fn: CostFn, params: np.ndarray, index: int) -> float:
    """Exact shift rule for controlled-rotation parameters.

    The generator of CRX/CRY/CRZ has a zero eigenvalue, which adds a
    half-frequency component to the raw output; the two-point pi/2 rule is
    then biased by tens of percent. Combining differences at pi/2 and
    3*pi/2 cancels it exactly.
    """
    near = shift_gradient(cost_fn, params, index, math.pi / 2.0)
    far = shift_gradient(cost_fn, params, index, 3.0 * math.pi / 2.0)
    return 2.0 * (_COEF_NEAR * near - _COEF_FAR * far)


def softmax(v: np.ndarray) -> np.ndarray:
    """Exp-normalize with max subtraction; sums to 1."""
    v = np.asarray(v, dtype=float)
    shifted = np.exp(v - np.max(v))
    return shifted / shifted.sum()


def _cost_and_head_slope(p0: float, y: int) -> tuple[float, float]:
    """Cost at the unshifted point and d(cost)/d(raw output).

    The slope chains the cross-entropy derivative through the [0.5,1]->[0,1]
    mapping (factor 2 above the clamp, 0 below it).
    """
    m = mapped_fidelity(p0)
    cost = binary_cost(m, y)
    m_safe = min(max(m, PROBABILITY_CLAMP), 1.0 - PROBABILITY_CLAMP)
    dcost_dm = (m_safe - y) / (m_safe * (1.0 - m_safe))
    dm_dp = 2.0 if p0 >= 0.5 else 0.0
    return cost, dcost_dm * dm_dp


def cost_at(
    spec: CircuitSpec,
    theta: np.ndarray,
    angles: np.ndarray,
    target: int,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Cross-entropy of the mapped swap-test fidelity against ``target``."""
    raw = swap_test_from_angles(spec, theta, angles, shots=shots, rng=rng)
    return binary_cost(mapped_fidelity(raw), target)


def quantum_gradients(
    spec: CircuitSpec,
    theta: np.ndarray,
    angles: np.ndarray,
    target: int,
    shift: float = math.pi / 2.0,
    exact_controlled: bool = True,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, float]:
    """Cost gradient for every ansatz parameter, plus the unshifted cost.

    The raw swap-test output is differentiated with the two-point rule at
    ``shift`` (exact at pi/2 for plain rotations) or, when
    ``exact_controlled`` is set, the four-point rule for controlled-rotation
    parameters; the result is chained through the cross-entropy head.
    """

    def raw(t: np.ndarray) -> float:
        return swap_test_from_angles(spec, t, angles, shots=shots, rng=rng)

    cost, slope = _cost_and_head_slope(raw(theta), target)
    kinds = parameter_gate_kinds(spec)
    grads = np.empty(theta.size)
    for i in range(theta.size):
        if exact_controlled and kinds[i] in CONTROLLED_ROTATION_KINDS:
            dp = controlled_shift_gradient(raw, theta, i)
        else:
            dp = shift_gradient(raw, theta, i, shift)
        grads[i] = slope * dp
    return grads, cost


def encoding_gradients(
    spec: CircuitSpec,
    theta: np.ndarray,
    angles: np.ndarray,
    target: int,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Cost gradient for each data-register encoding angle.

    Encoding rotations are plain RY/RZ gates, so the two-point pi/2 rule is
    exact regardless of the training shift schedule.
    """

    def raw(shifted: np.ndarray) -> float:
        return swap_test_from_angles(spec, theta, shifted, shots=shots, rng=rng)

    _, slope = _cost_and_head_slope(raw(angles), target)
    return np.array(
        [slope * shift_gradient(raw, angles, j, math.pi / 2.0)
         for j in range(angles.size)]
    )


def _circuit_plan(model: ModelState, label: int, update_all: bool) -> list[tuple[int, int]]:
    """(circuit index, target) pairs trained for one sample."""
    if model.is_binary:
        return [(0, int(label))]
    if update_all:
        return [(c, 1 if c == label else 0) for c in range(model.num_classes)]
    return [(int(label), 1)]


def _train_step(
    model: ModelState,
    phi: np.ndarray,
    label: int,
    shift: float,
    config: TrainConfig,
    rng: np.random.Generator,
) -> float:
    """One per-sample update; returns the sample's mean pre-update cost."""
    spec = model.spec
    lr = config.learning_rate
    sampler = rng if config.mode == "shots" else None
    shots = config.shots if config.mode == "shots" else None
    out = mps_forward(model.mps, phi)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("tensor network output is not finite")
    angles = np.arctan(out)
    plan = _circuit_plan(model, label, config.update_all_circuits)
    exact_controlled = config.shift_mode is ShiftMode.FIXED_HALF_PI

    # Quantum parameters: gradients at a frozen snapshot, then one write.
    total_cost = 0.0
    for circuit_index, target in plan:
        theta = model.thetas[circuit_index]
        grads, cost = quantum_gradients(
            spec, theta, angles, target,
            shift=shift, exact_controlled=exact_controlled,
            shots=shots, rng=sampler,
        )
        total_cost += cost
        theta -= lr * grads

    # Tensor network last, against the just-updated circuits.
    upstream_angles = np.zeros_like(angles)
    for circuit_index, target in plan:
        upstream_angles += encoding_gradients(
            spec, model.thetas[circuit_index], angles, target,
            shots=shots, rng=sampler,
        )
    upstream_out = upstream_angles / (1.0 + out ** 2)  # d(atan)/d(out)
    for tensor, grad in zip(model.mps.site_tensors, mps_backward(model.mps, phi, upstream_out)):
        tensor -= lr * grad
    return total_cost / len(plan)


def class_scores(model: ModelState, features: np.ndarray) -> np.ndarray:
    """Per-class scores for one normalized feature vector (exact mode)."""
    out = mps_forward(model.mps, feature_map(features))
    angles = np.arctan(out)
    fidelities = np.array(
        [mapped_fidelity(swap_test_from_angles(model.spec, theta, angles))
         for theta in model.thetas]
    )
    if model.is_binary:
        return np.array([1.0 - fidelities[0], fidelities[0]])
    return softmax(fidelities)


def predict(model: ModelState, features: np.ndarray) -> tuple[int, np.ndarray]:
    """Classify one sample; returns (class index, per-class scores).

    Binary: the single circuit's mapped fidelity is thresholded at 0.5
    (below -> class 0). Multi-class: argmax of the softmaxed fidelities,
    ties resolved to the lowest class index.
    """
    scores = class_scores(model, features)
    if model.is_binary:
        return (0 if scores[1] < 0.5 else 1), scores
    return int(np.argmax(scores)), scores


def evaluate(
    model: ModelState, features: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Accuracy and confusion counts (rows: true class, columns: predicted)."""
    k = model.num_classes
    confusion = np.zeros((k, k), dtype=int)
    for x, y in zip(features, labels):
        predicted, _ = predict(model, x)
        confusion[int(y), predicted] += 1
    total = confusion.sum()
    accuracy = float(np.trace(confusion)) / total if total else 0.0
    return accuracy, confusion


def train(
    model: ModelState,
    train_features: np.ndarray,
    train_labels: np.ndarray,
    config: TrainConfig,
    test_features: np.ndarray | None = None,
    test_labels: np.ndarray | None = None,
) -> tuple[ModelState, list[LossRecord]]:
    """Run the sample-by-sample training loop and record per-epoch metrics.

    ``train_features`` holds normalized values in [0, 1], one row per sample;
    labels are contiguous class indices. The model is updated in place and
    also returned.
    """
    features = np.asarray(train_features, dtype=float)
    labels = np.asarray(train_labels)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError("training set must be a nonempty 2-D array")
    if features.shape[0] != labels.shape[0]:
        raise ValueError("feature and label counts differ")
    if features.shape[1] != model.mps.num_sites:
        raise ValueError(
            f"feature dimension {features.shape[1]} does not match "
            f"{model.mps.num_sites} tensor-network sites"
        )
    if np.any(labels < 0) or np.any(labels >= model.num_classes):
        raise ValueError("labels must be contiguous class indices")

    rng = np.random.default_rng(config.seed)
    half_pi_x = 0.5 * np.pi * features
    phis = np.stack([np.cos(half_pi_x), np.sin(half_pi_x)], axis=2)

    records: list[LossRecord] = []
    for epoch in range(1, config.epochs + 1):
        shift = (
            math.pi / 2.0
            if config.shift_mode is ShiftMode.FIXED_HALF_PI
            else epoch_shift(epoch)
        )
        costs = []
        for index in rng.permutation(features.shape[0]):
            try:
                cost = _train_step(model, phis[index], int(labels[index]), shift, config, rng)
            except FloatingPointError as exc:
                raise TrainingDivergenceError(str(exc), epoch, int(index)) from exc
            if not math.isfinite(cost):
                raise TrainingDivergenceError("cost is not finite", epoch, int(index))
            costs.append(cost)
        train_accuracy, _ = evaluate(model, features, labels)
        if test_features is not None and test_labels is not None:
            test_accuracy, _ = evaluate(model, test_features, test_labels)
        else:
            test_accuracy = math.nan
        records.append(
            LossRecord(epoch, float(np.mean(costs)), train_accuracy, test_accuracy)
        )
    return model, records
