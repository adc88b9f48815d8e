import math

import numpy as np
import pytest

from swapnet.circuit import (
    CircuitSpec,
    LayerKind,
    mapped_fidelity,
    parameter_count,
    parameter_gate_kinds,
    prepare_trained_state,
    random_parameters,
    swap_test,
)
from swapnet.core import GateKind, init_state
from swapnet.encoding import EncodingMode, EncodingPlan, encode_features

from oracles import embed_1q, embed_2q

S, D, E = LayerKind.SINGLE_UNITARY, LayerKind.DUAL_UNITARY, LayerKind.ENTANGLE_UNITARY


def sde_spec(register_qubits=2):
    return CircuitSpec(register_qubits, register_qubits, (S, D, E))


def test_parameter_counts():
    assert parameter_count(CircuitSpec(2, 2, (S,))) == 4
    assert parameter_count(sde_spec(2)) == 8
    assert parameter_count(CircuitSpec(3, 3, (S,))) == 6
    assert parameter_count(sde_spec(3)) == 14


def test_parameter_gate_kinds_order():
    kinds = parameter_gate_kinds(sde_spec(2))
    assert kinds == [
        GateKind.RY, GateKind.RZ, GateKind.RY, GateKind.RZ,
        GateKind.RYY, GateKind.RZZ, GateKind.CRY, GateKind.CRZ,
    ]


def test_spec_validation():
    with pytest.raises(ValueError):
        CircuitSpec(2, 3, (S,))
    with pytest.raises(ValueError):
        CircuitSpec(2, 2, ())
    with pytest.raises(ValueError):
        CircuitSpec(0, 0, (S,))


def test_zero_parameters_leave_register_in_ground_state():
    spec = sde_spec(2)
    state = prepare_trained_state(spec, np.zeros(8), init_state(2), first_qubit=0)
    assert abs(abs(state.amplitudes[0]) - 1.0) < 1e-12  # up to global phase


def test_single_layer_ry_pi_flips_qubit():
    spec = CircuitSpec(1, 1, (S,))
    state = prepare_trained_state(spec, np.array([math.pi, 0.0]), init_state(1), first_qubit=0)
    assert np.allclose(np.abs(state.amplitudes), [0, 1], atol=1e-12)


def test_parameter_length_mismatch():
    with pytest.raises(ValueError):
        prepare_trained_state(sde_spec(2), np.zeros(7), init_state(5))


def test_layers_match_explicit_matrix_product():
    from swapnet.core import gate_matrix

    spec = CircuitSpec(2, 2, (S, D))
    rng = np.random.default_rng(17)
    params = rng.uniform(-math.pi, math.pi, parameter_count(spec))
    state = prepare_trained_state(spec, params, init_state(2), first_qubit=0)

    unitary = np.eye(4, dtype=complex)
    order = [
        (GateKind.RY, params[0], (0,)), (GateKind.RZ, params[1], (0,)),
        (GateKind.RY, params[2], (1,)), (GateKind.RZ, params[3], (1,)),
        (GateKind.RYY, params[4], (0, 1)), (GateKind.RZZ, params[5], (0, 1)),
    ]
    for kind, angle, qubits in order:
        g = gate_matrix(kind, angle).elements
        full = embed_1q(g, qubits[0], 2) if len(qubits) == 1 else embed_2q(g, *qubits, 2)
        unitary = full @ unitary
    expected = unitary @ np.array([1, 0, 0, 0], dtype=complex)
    assert np.max(np.abs(state.amplitudes - expected)) < 1e-12


def test_swap_test_identical_states_reads_one():
    # Encoding applies RY/RZ with the same angles the single layer consumes,
    # so these parameters reproduce the data state exactly.
    spec = CircuitSpec(2, 2, (S,))
    features = np.array([0.3, 0.8, 0.6, 0.1])
    plan = EncodingPlan.for_dimension(4, EncodingMode.RAW_UNIT_INTERVAL)
    from swapnet.encoding import rotation_angles

    params = rotation_angles(features, plan)
    assert abs(swap_test(spec, params, features) - 1.0) < 1e-12


def test_swap_test_orthogonal_states_read_half():
    spec = CircuitSpec(2, 2, (S,))
    value = swap_test(spec, np.zeros(4), np.array([1.0, 0.0, 1.0, 0.0]))
    assert abs(value - 0.5) < 1e-12


def _product_state_fidelity(spec, params, features):
    """Squared overlap of the two registers prepared separately."""
    data = init_state(spec.data_qubits)
    plan = EncodingPlan.for_dimension(len(features), EncodingMode.RAW_UNIT_INTERVAL)
    encode_features(data, features, 0, plan)
    trained = init_state(spec.trained_qubits)
    prepare_trained_state(spec, params, trained, first_qubit=0)
    return abs(np.vdot(data.amplitudes, trained.amplitudes)) ** 2


def test_swap_test_matches_inner_product_oracle():
    spec = sde_spec(2)
    rng = np.random.default_rng(23)
    for _ in range(100):
        features = rng.uniform(0, 1, 4)
        params = random_parameters(spec, rng)
        fidelity = _product_state_fidelity(spec, params, features)
        assert abs(swap_test(spec, params, features) - (1 + fidelity) / 2) < 1e-10


def test_swap_test_output_range():
    spec = sde_spec(2)
    rng = np.random.default_rng(31)
    for _ in range(50):
        value = swap_test(spec, random_parameters(spec, rng), rng.uniform(0, 1, 4))
        assert 0.5 - 1e-12 <= value <= 1.0 + 1e-12


def test_swap_test_shots_estimate_converges():
    spec = sde_spec(2)
    rng = np.random.default_rng(37)
    params = random_parameters(spec, rng)
    features = rng.uniform(0, 1, 4)
    exact = swap_test(spec, params, features)
    estimate = swap_test(spec, params, features, shots=100_000, rng=41)
    assert abs(estimate - exact) < 0.01


def test_swap_test_shots_requires_rng():
    spec = CircuitSpec(1, 1, (S,))
    with pytest.raises(ValueError):
        swap_test(spec, np.zeros(2), np.zeros(2), shots=16)


def test_swap_test_dimension_mismatch():
    spec = sde_spec(2)
    with pytest.raises(ValueError):
        swap_test(spec, np.zeros(8), np.zeros(6))


def test_mapped_fidelity_endpoints_and_clamp():
    assert mapped_fidelity(1.0) == 1.0
    assert mapped_fidelity(0.5) == 0.0
    assert mapped_fidelity(0.48) == 0.0  # shot noise below 0.5 clamps to 0
    assert abs(mapped_fidelity(0.75) - 0.5) < 1e-15
