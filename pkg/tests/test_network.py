import math

import numpy as np
import pytest

from zeroplay.nn import Network, NetworkSpec, loss_and_gradients, sgd_step
from zeroplay.nn.network import param_shapes, policy_log_softmax

from .test_nn_ops import central_difference, relative_error


def small_net(seed=0, dtype=np.float64, **overrides):
    spec = NetworkSpec(**{**dict(trunk_channels=4, residual_blocks=1, value_pool_channels=2,
                                 value_hidden=5, policy_channels=2), **overrides})
    return Network.initialize(spec, np.random.default_rng(seed), dtype=dtype)


def test_spec_validation():
    with pytest.raises(ValueError):
        NetworkSpec(kernel_size=4)
    with pytest.raises(ValueError):
        NetworkSpec(residual_blocks=0)


def test_forward_shapes_follow_input_size():
    net = small_net()
    for h, w in ((4, 4), (7, 7), (9, 9), (11, 13)):
        x = np.random.default_rng(1).normal(size=(2, 3, h, w))
        policy, value = net.forward(x)
        assert policy.shape == (2, 2, h, w)
        assert value.shape == (2,)


def test_value_in_tanh_range():
    net = small_net(seed=3)
    rng = np.random.default_rng(5)
    x = rng.normal(size=(1000, 3, 5, 5))
    _, value = net.forward(x)
    assert ((-1 < value) & (value < 1)).all()


def test_zero_weights_give_zero_logits_and_bias_value():
    spec = NetworkSpec(trunk_channels=4, residual_blocks=1, value_pool_channels=2,
                       value_hidden=5, policy_channels=2)
    params = {name: np.zeros(shape) for name, shape in param_shapes(spec)}
    net = Network(spec, params)
    x = np.random.default_rng(0).normal(size=(3, 3, 5, 5))
    policy, value = net.forward(x)
    assert (policy == 0).all()
    np.testing.assert_allclose(value, math.tanh(0.0))


def test_channel_mismatch_rejected():
    net = small_net()
    with pytest.raises(ValueError):
        net.forward(np.zeros((1, 5, 4, 4)))


def test_input_smaller_than_kernel_is_legal():
    net = small_net()
    policy, value = net.forward(np.ones((1, 3, 1, 1)))
    assert policy.shape == (1, 2, 1, 1) and np.isfinite(value).all()


def test_full_network_gradients_match_finite_differences():
    """End-to-end gradient check through the composed loss."""
    rng = np.random.default_rng(9)
    net = small_net(seed=2, dtype=np.float64, trunk_channels=3, value_hidden=4)
    n, h, w = 2, 3, 3
    states = rng.normal(size=(n, 3, h, w))
    total_actions = 2 * h * w
    legal = rng.random((n, total_actions)) < 0.6
    legal[:, 0] = True
    targets = np.where(legal, rng.random((n, total_actions)), 0.0)
    targets /= targets.sum(axis=1, keepdims=True)
    rewards = rng.uniform(-1, 1, size=n)

    _, _, grads = loss_and_gradients(net, states, targets, legal, rewards, weight_decay=0.01)

    for name in ("trunk.in.kernel", "trunk.block0.conv2.kernel", "policy.conv.kernel",
                 "value.conv.bias", "value.fc1.weight", "value.fc2.bias"):
        def scalar():
            total, _, _ = loss_and_gradients(net, states, targets, legal, rewards,
                                             weight_decay=0.01)
            return total

        numeric = central_difference(scalar, net.params[name])
        err = relative_error(grads[name], numeric)
        assert err < 1e-4, f"{name}: relative error {err:.2e}"


def test_loss_equals_entropy_at_optimum():
    net = small_net(seed=4, dtype=np.float64)
    rng = np.random.default_rng(11)
    n, h, w = 3, 4, 4
    states = rng.normal(size=(n, 3, h, w))
    policy, value = net.forward(states)
    flat = policy.reshape(n, -1)
    legal = np.ones_like(flat, dtype=bool)
    _, q = policy_log_softmax(flat, legal)
    total, terms, _ = loss_and_gradients(net, states, q, legal, value, weight_decay=0.0)
    entropy = float(-(q * np.log(q)).sum() / n)
    assert total == pytest.approx(entropy, rel=1e-9)
    assert terms["value"] == pytest.approx(0.0, abs=1e-18)


def test_loss_never_beats_the_entropy_floor():
    """Total loss >= H(p) for any weights when decay is non-negative."""
    rng = np.random.default_rng(21)
    for seed in range(5):
        net = small_net(seed=seed, dtype=np.float64)
        n, h, w = 4, 3, 3
        states = rng.normal(size=(n, 3, h, w))
        legal = rng.random((n, 2 * h * w)) < 0.7
        legal[:, 3] = True
        targets = np.where(legal, rng.random((n, 2 * h * w)), 0.0)
        targets /= targets.sum(axis=1, keepdims=True)
        rewards = rng.uniform(-1, 1, size=n)
        total, _, _ = loss_and_gradients(net, states, targets, legal, rewards,
                                         weight_decay=rng.choice([0.0, 1e-3]))
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = np.where(targets > 0, np.log(targets), 0.0)
        entropy = float(-(targets * logp).sum() / n)
        assert total >= entropy - 1e-12


def test_value_term_contribution():
    net = small_net(seed=6, dtype=np.float64)
    spec = net.spec
    params = {name: np.zeros(shape) for name, shape in param_shapes(spec)}
    zero_net = Network(spec, params)
    states = np.zeros((1, 3, 4, 4))
    legal = np.ones((1, 2 * 16), dtype=bool)
    targets = np.full((1, 32), 1 / 32)
    total, terms, _ = loss_and_gradients(zero_net, states, targets, legal,
                                         np.array([1.0]), weight_decay=0.0)
    assert terms["value"] == pytest.approx(1.0)  # (0 - 1)^2


def test_weight_decay_term():
    spec = NetworkSpec(trunk_channels=4, residual_blocks=1, value_pool_channels=2,
                       value_hidden=5, policy_channels=2)
    params = {name: np.zeros(shape) for name, shape in param_shapes(spec)}
    params["value.fc2.weight"] = params["value.fc2.weight"].copy()
    params["value.fc2.weight"][0, 0] = 2.0
    net = Network(spec, params)
    states = np.zeros((1, 3, 4, 4))
    legal = np.ones((1, 32), dtype=bool)
    targets = np.full((1, 32), 1 / 32)
    _, terms, _ = loss_and_gradients(net, states, targets, legal, np.array([0.0]),
                                     weight_decay=0.01)
    assert terms["decay"] == pytest.approx(0.04)


def test_loss_rejects_unnormalised_targets():
    net = small_net()
    states = np.zeros((1, 3, 4, 4))
    legal = np.ones((1, 32), dtype=bool)
    targets = np.full((1, 32), 1 / 16)  # sums to 2
    with pytest.raises(ValueError):
        loss_and_gradients(net, states, targets, legal, np.array([0.0]))


def test_sgd_step_and_zero_learning_rate():
    net = small_net(dtype=np.float64)
    before = {k: v.copy() for k, v in net.params.items()}
    grads = {k: np.ones_like(v) for k, v in net.params.items()}
    sgd_step(net, grads, 0.0)
    for k in before:
        np.testing.assert_array_equal(net.params[k], before[k])
    sgd_step(net, grads, 0.1)
    for k in before:
        np.testing.assert_allclose(net.params[k], before[k] - 0.1)


def test_sgd_hand_value():
    spec = NetworkSpec(trunk_channels=4, residual_blocks=1, value_pool_channels=2,
                       value_hidden=5, policy_channels=2)
    params = {name: np.zeros(shape) for name, shape in param_shapes(spec)}
    params["value.fc2.bias"] = np.array([1.0])
    net = Network(spec, params)
    grads = {k: np.zeros_like(v) for k, v in net.params.items()}
    grads["value.fc2.bias"] = np.array([0.5])
    sgd_step(net, grads, 0.1)
    assert net.params["value.fc2.bias"][0] == pytest.approx(0.95)


def test_sgd_rejects_non_finite_gradient():
    net = small_net()
    grads = {k: np.zeros_like(v) for k, v in net.params.items()}
    grads["trunk.in.bias"][0] = np.nan
    with pytest.raises(FloatingPointError, match="trunk.in.bias"):
        sgd_step(net, grads, 0.1)


def test_one_step_decreases_loss_on_fixed_batch():
    net = small_net(seed=8, dtype=np.float64)
    rng = np.random.default_rng(13)
    states = rng.normal(size=(8, 3, 4, 4))
    legal = np.ones((8, 32), dtype=bool)
    targets = rng.random((8, 32))
    targets /= targets.sum(axis=1, keepdims=True)
    rewards = rng.uniform(-1, 1, size=8)
    before, _, grads = loss_and_gradients(net, states, targets, legal, rewards)
    sgd_step(net, grads, 1e-3)
    after, _, _ = loss_and_gradients(net, states, targets, legal, rewards)
    assert after < before
