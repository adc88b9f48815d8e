"""Hybrid tensor-network + variational quantum classifier.

A trainable matrix-product-state feature extractor compresses images into a
few values that are angle-encoded onto the data register of a swap-test
circuit; the trained register holds a layered ansatz whose state fidelity
against the data state drives a cross-entropy loss, differentiated with
shift rules and descended sample by sample.
"""

from .circuit import (
    CircuitSpec,
    LayerKind,
    mapped_fidelity,
    parameter_count,
    prepare_trained_state,
    random_parameters,
    swap_test,
)
from .core import (
    GateKind,
    GateMatrix,
    MeasurementOutcome,
    StateVector,
    apply_1q,
    apply_2q,
    apply_cswap,
    gate_matrix,
    init_state,
    sample,
    zero_probability,
)
from .data import DatasetSplit, LabeledImage, filter_classes, load_idx, split_and_cap
from .encoding import (
    EncodingMode,
    EncodingPlan,
    NormalizationStats,
    angle_from_value,
    encode_features,
    normalize_dataset,
)
from .tensornet import MpsModel, feature_map, mps_backward, mps_forward
from .training import (
    LossRecord,
    ModelState,
    ShiftMode,
    TrainConfig,
    TrainingDivergenceError,
    binary_cost,
    controlled_shift_gradient,
    cost_at,
    encoding_gradients,
    epoch_shift,
    evaluate,
    finite_difference_gradient,
    initialize_model,
    predict,
    quantum_gradients,
    shift_gradient,
    softmax,
    train,
)

__version__ = "0.1.0"
