import numpy as np
import pytest

from dinechat.network import MLP, gradient_check, loss_and_grads


def test_forward_shape_and_determinism():
    net = MLP((5, 64, 64, 15), seed=0)
    x = np.random.default_rng(1).random((4, 5))
    out1, _ = net.forward(x)
    out2, _ = net.forward(x)
    assert out1.shape == (4, 15)
    assert np.array_equal(out1, out2)


def test_same_seed_same_weights():
    a = MLP((5, 8, 3), seed=11)
    b = MLP((5, 8, 3), seed=11)
    for (wa, ba), (wb, bb) in zip(a.get_weights(), b.get_weights()):
        assert np.array_equal(wa, wb)
        assert np.array_equal(ba, bb)


def test_gradient_check_linear_network():
    rng = np.random.default_rng(0)
    net = MLP((4, 3), seed=1)
    err = gradient_check(net, rng.random(4), rng.random(3))
    assert err < 1e-7


def test_gradient_check_default_mlp():
    rng = np.random.default_rng(2)
    net = MLP((5, 64, 64, 15), seed=3)
    err = gradient_check(net, rng.random(5), rng.random(15))
    assert err < 1e-4


def test_gradient_check_flags_corrupted_gradient():
    rng = np.random.default_rng(4)
    net = MLP((5, 16, 8), seed=5)
    x, target = rng.random(5), rng.random(8)
    _, grads = loss_and_grads(net, x, target)
    corrupted = [(gw * 1.5, gb) for gw, gb in grads]
    err = gradient_check(net, x, target, grads=corrupted)
    assert err > 1e-4


def test_gradient_clipping_bounds_step():
    net = MLP((3, 4), seed=0)
    before = net.get_weights()
    huge = [(np.full((3, 4), 1e6), np.full(4, 1e6))]
    net.apply_gradients(huge, learning_rate=1.0, clip_norm=10.0)
    after = net.get_weights()
    delta_sq = sum(np.sum((b[0] - a[0]) ** 2) + np.sum((b[1] - a[1]) ** 2)
                   for a, b in zip(after, before))
    assert np.sqrt(delta_sq) == pytest.approx(10.0, rel=1e-9)


def test_copy_is_independent():
    net = MLP((3, 4), seed=0)
    clone = net.copy()
    net.apply_gradients([(np.ones((3, 4)), np.ones(4))], learning_rate=0.1)
    assert not np.array_equal(net.weights[0], clone.weights[0])
