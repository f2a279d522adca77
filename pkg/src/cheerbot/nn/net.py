"""Dense feedforward nets built from (weight, bias, activation) layers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autograd as ag
from .autograd import Tensor

ACTIVATIONS = ("identity", "relu", "leaky_relu", "softmax", "tanh")


@dataclass
class Layer:
    weight: Tensor
    bias: Tensor
    activation: str


class DenseNet:
    """Stack of affine layers with per-layer activation tags.

    `dims` is [in, h1, ..., out]; `activations` has one tag per layer.
    Weights use scaled-normal init from `rng`, or zeros when rng is None
    (useful for the uniform-output edge cases).
    """

    def __init__(
        self,
        dims: list[int],
        activations: list[str],
        rng: np.random.Generator | None = None,
        leaky_slope: float = 0.01,
    ):
        if len(activations) != len(dims) - 1:
            raise ValueError("need one activation per layer")
        for act in activations:
            if act not in ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")
        self.leaky_slope = leaky_slope
        self.layers: list[Layer] = []
        for d_in, d_out, act in zip(dims, dims[1:], activations):
            if rng is None:
                w = np.zeros((d_in, d_out))
            else:
                w = rng.normal(0.0, 1.0 / np.sqrt(d_in), size=(d_in, d_out))
            self.layers.append(
                Layer(
                    weight=Tensor(w, requires_grad=True),
                    bias=Tensor(np.zeros(d_out), requires_grad=True),
                    activation=act,
                )
            )

    @property
    def in_dim(self) -> int:
        return self.layers[0].weight.data.shape[0]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].weight.data.shape[1]

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.data.shape[1] != self.in_dim:
            raise ValueError(
                f"input shape {x.data.shape} incompatible with first layer "
                f"({self.in_dim} features expected)"
            )
        h = x
        for layer in self.layers:
            h = ag.add(ag.matmul(h, layer.weight), layer.bias)
            if layer.activation == "relu":
                h = ag.relu(h)
            elif layer.activation == "leaky_relu":
                h = ag.leaky_relu(h, self.leaky_slope)
            elif layer.activation == "softmax":
                h = ag.softmax(h)
            elif layer.activation == "tanh":
                h = ag.tanh(h)
        return h

    __call__ = forward

    def parameters(self) -> list[Tensor]:
        out = []
        for layer in self.layers:
            out.append(layer.weight)
            out.append(layer.bias)
        return out
