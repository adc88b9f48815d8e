import math

import numpy as np
import pytest

from swapnet.tensornet import MpsModel, feature_map, mps_backward, mps_forward

from oracles import dense_mps_forward, per_site_mps_gradients


def small_model(num_sites=6, n_out=3, bond_dim=3, seed=0, noise=0.3):
    # Larger noise than the training default so oracle comparisons exercise
    # generic tensors rather than near-identity ones.
    return MpsModel.initialize(num_sites, n_out, bond_dim=bond_dim, rng=seed, noise=noise)


def test_feature_map_endpoints():
    mapped = feature_map(np.array([0.0, 1.0, 0.5]))
    assert np.allclose(mapped[0], [1, 0], atol=1e-15)
    assert np.allclose(mapped[1], [0, 1], atol=1e-12)
    assert np.allclose(mapped[2], [math.sqrt(2) / 2] * 2, atol=1e-15)


def test_feature_map_unit_norm():
    rng = np.random.default_rng(3)
    mapped = feature_map(rng.uniform(0, 1, 100))
    assert np.max(np.abs(np.linalg.norm(mapped, axis=1) - 1.0)) < 1e-12


def test_feature_map_domain_error():
    with pytest.raises(ValueError):
        feature_map(np.array([0.5, 1.2]))
    with pytest.raises(ValueError):
        feature_map(np.array([-0.1]))
    with pytest.raises(ValueError):
        feature_map(np.array([]))


def test_model_shape_validation():
    with pytest.raises(ValueError):
        MpsModel([np.zeros((1, 2, 3)), np.zeros((2, 2, 1, 4))], output_site=1)
    with pytest.raises(ValueError):
        MpsModel([np.zeros((2, 2, 1, 4))], output_site=0)  # left boundary != 1


def test_forward_bond_dim_one_hand_contraction():
    # chi = 1 reduces every bond to a scalar product that can be done by hand.
    t0 = np.array([[[0.5], [2.0]]])
    t1 = np.zeros((1, 2, 1, 2))
    t1[0, :, 0, 0] = (1.0, -1.0)
    t1[0, :, 0, 1] = (3.0, 0.5)
    t2 = np.array([[[1.5], [-0.5]]])
    model = MpsModel([t0, t1, t2], output_site=1)
    x = np.array([0.0, 0.5, 1.0])
    mapped = feature_map(x)
    s0 = 0.5 * mapped[0, 0] + 2.0 * mapped[0, 1]
    s2 = 1.5 * mapped[2, 0] - 0.5 * mapped[2, 1]
    expected = [
        s0 * (1.0 * mapped[1, 0] - 1.0 * mapped[1, 1]) * s2,
        s0 * (3.0 * mapped[1, 0] + 0.5 * mapped[1, 1]) * s2,
    ]
    assert np.allclose(mps_forward(model, mapped), expected, atol=1e-12)


def test_zero_output_tensor_gives_zero_vector():
    model = small_model()
    model.site_tensors[model.output_site][:] = 0.0
    mapped = feature_map(np.random.default_rng(1).uniform(0, 1, model.num_sites))
    assert np.array_equal(mps_forward(model, mapped), np.zeros(model.n_out))


def test_forward_matches_dense_contraction_oracle():
    rng = np.random.default_rng(10)
    for num_sites, bond_dim, out_site in [(4, 2, 2), (6, 3, 3), (8, 3, 0), (8, 3, 7), (5, 1, 2)]:
        model = MpsModel.initialize(
            num_sites, 3, bond_dim=bond_dim, output_site=out_site, rng=rng, noise=0.4
        )
        mapped = feature_map(rng.uniform(0, 1, num_sites))
        fast = mps_forward(model, mapped)
        dense = dense_mps_forward(model, mapped)
        assert np.max(np.abs(fast - dense)) < 1e-10


def test_forward_linear_in_single_site_tensor():
    rng = np.random.default_rng(12)
    model_a = small_model(seed=20)
    model_b = model_a.copy()
    perturbation = rng.normal(size=model_b.site_tensors[2].shape)
    model_b.site_tensors[2] = perturbation
    model_sum = model_a.copy()
    model_sum.site_tensors[2] = model_a.site_tensors[2] + perturbation
    mapped = feature_map(rng.uniform(0, 1, model_a.num_sites))
    combined = mps_forward(model_a, mapped) + mps_forward(model_b, mapped)
    assert np.allclose(mps_forward(model_sum, mapped), combined, atol=1e-10)


def test_backward_zero_upstream():
    model = small_model()
    mapped = feature_map(np.random.default_rng(2).uniform(0, 1, model.num_sites))
    grads = mps_backward(model, mapped, np.zeros(model.n_out))
    assert all(np.array_equal(g, np.zeros_like(t))
               for g, t in zip(grads, model.site_tensors))


def test_backward_single_site_outer_product():
    rng = np.random.default_rng(30)
    tensor = rng.normal(size=(1, 2, 1, 4))
    model = MpsModel([tensor], output_site=0)
    mapped = feature_map(np.array([0.37]))
    upstream = rng.normal(size=4)
    (grad,) = mps_backward(model, mapped, upstream)
    expected = mapped[0][None, :, None, None] * upstream[None, None, None, :]
    assert np.allclose(grad, expected, atol=1e-12)


def finite_difference_grads(model, mapped, upstream, step=1e-5):
    grads = []
    for site in range(model.num_sites):
        tensor = model.site_tensors[site]
        grad = np.zeros_like(tensor)
        for index in np.ndindex(tensor.shape):
            saved = tensor[index]
            tensor[index] = saved + step
            up = float(upstream @ mps_forward(model, mapped))
            tensor[index] = saved - step
            down = float(upstream @ mps_forward(model, mapped))
            tensor[index] = saved
            grad[index] = (up - down) / (2 * step)
        grads.append(grad)
    return grads


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(42)
    model = MpsModel.initialize(8, 3, bond_dim=3, rng=rng, noise=0.3)
    mapped = feature_map(rng.uniform(0, 1, 8))
    upstream = rng.normal(size=3)
    analytic = mps_backward(model, mapped, upstream)
    numeric = finite_difference_grads(model, mapped, upstream)
    for a, n in zip(analytic, numeric):
        scale = np.maximum(np.abs(n), 1e-6)
        assert np.max(np.abs(a - n) / scale) < 1e-4


def test_backward_matches_from_scratch_environments():
    rng = np.random.default_rng(55)
    model = small_model(num_sites=7, seed=56)
    mapped = feature_map(rng.uniform(0, 1, 7))
    upstream = rng.normal(size=model.n_out)
    cached = mps_backward(model, mapped, upstream)
    scratch = per_site_mps_gradients(model, mapped, upstream)
    for a, b in zip(cached, scratch):
        assert np.max(np.abs(a - b)) < 1e-12


def test_long_chain_stays_finite():
    model = MpsModel.initialize(784, 4, bond_dim=4, rng=7)
    rng = np.random.default_rng(8)
    mapped = feature_map(rng.uniform(0, 1, 784))
    out = mps_forward(model, mapped)
    assert out.shape == (4,)
    assert np.all(np.isfinite(out))
    grads = mps_backward(model, mapped, np.ones(4))
    assert all(np.all(np.isfinite(g)) for g in grads)


def test_long_chain_with_growing_scale_stays_finite():
    # Tensors scaled so the raw 300-site product would overflow doubles.
    model = MpsModel.initialize(300, 2, bond_dim=2, rng=9)
    for t in model.site_tensors:
        t *= 5.0
    mapped = feature_map(np.full(300, 0.5))
    out = mps_forward(model, mapped)
    assert np.all(np.isfinite(out))
