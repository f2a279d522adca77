"""DenseNet construction plus parameter serialization round-trips."""

import numpy as np
import pytest

from cheerbot import nn
from cheerbot.nn import DenseNet, Tensor


def test_densenet_shapes_and_param_order():
    net = DenseNet([4, 8, 3], ["leaky_relu", "softmax"], rng=np.random.default_rng(0))
    params = net.parameters()
    assert [tuple(p.data.shape) for p in params] == [(4, 8), (8,), (8, 3), (3,)]
    assert net.in_dim == 4 and net.out_dim == 3


def test_densenet_zero_init_gives_uniform_softmax():
    net = DenseNet([5, 3], ["softmax"], rng=None)
    out = net.forward(Tensor(np.random.default_rng(1).normal(size=(2, 5))))
    assert np.allclose(out.data, 1.0 / 3.0, atol=0)


def test_densenet_same_rng_same_weights():
    a = DenseNet([3, 4], ["tanh"], rng=np.random.default_rng(7))
    b = DenseNet([3, 4], ["tanh"], rng=np.random.default_rng(7))
    assert np.array_equal(a.layers[0].weight.data, b.layers[0].weight.data)


def test_densenet_validation():
    with pytest.raises(ValueError):
        DenseNet([3, 4], ["relu", "relu"], rng=None)
    with pytest.raises(ValueError):
        DenseNet([3, 4], ["swish"], rng=None)
    net = DenseNet([3, 4], ["relu"], rng=None)
    with pytest.raises(ValueError):
        net.forward(Tensor(np.zeros((2, 5))))


def test_identity_activation_is_affine():
    net = DenseNet([2, 2], ["identity"], rng=np.random.default_rng(2))
    x = np.array([[1.0, -1.0]])
    out = net.forward(Tensor(x)).data
    w = net.layers[0].weight.data
    assert np.allclose(out, x @ w, atol=0)


def test_params_roundtrip_is_bitwise():
    rng = np.random.default_rng(5)
    params = [
        Tensor(rng.normal(size=(3, 4)) * 1e-7, requires_grad=True),
        Tensor(rng.normal(size=(4,)) * 1e9, requires_grad=True),
    ]
    d = nn.params_to_dict(params)
    arrays = nn.arrays_from_dict(d)
    for p, a in zip(params, arrays):
        assert np.array_equal(p.data, a)
        assert p.data.dtype == a.dtype == np.float64


def test_load_params_dict_checks_shape_and_count():
    params = [Tensor(np.zeros((2, 2)), requires_grad=True)]
    d = nn.params_to_dict(params)
    with pytest.raises(ValueError):
        nn.load_params_dict([Tensor(np.zeros((2, 3)), requires_grad=True)], d)
    with pytest.raises(ValueError):
        nn.load_params_dict(params + [Tensor(np.zeros(1))], d)
    bad = dict(d)
    bad["format_version"] = 99
    with pytest.raises(ValueError):
        nn.arrays_from_dict(bad)


def test_params_hash_tracks_content_not_identity():
    a = [Tensor(np.array([1.0, 2.0]))]
    b = [Tensor(np.array([1.0, 2.0]))]
    c = [Tensor(np.array([1.0, 2.0 + 1e-15]))]
    assert nn.params_hash(a) == nn.params_hash(b)
    assert nn.params_hash(a) != nn.params_hash(c)
