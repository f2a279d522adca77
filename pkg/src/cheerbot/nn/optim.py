"""SGD and Adam with elementwise gradient clipping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autograd import Tensor


@dataclass
class OptimConfig:
    algorithm: str = "adam"
    learning_rate: float = 1e-3
    clip_bound: float | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.algorithm not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.algorithm!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.clip_bound is not None and self.clip_bound <= 0:
            raise ValueError("clip_bound must be positive")


class Optimizer:
    """Updates a fixed parameter list in place; clears gradients after a step.

    Gradients are clamped elementwise into [-clip_bound, +clip_bound] before
    the update rule, matching the applied-gradient bound contract.
    """

    def __init__(self, params: list[Tensor], config: OptimConfig):
        self.params = list(params)
        self.config = config
        self.t = 0
        if config.algorithm == "adam":
            self._m = [np.zeros_like(p.data) for p in self.params]
            self._v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        cfg = self.config
        for p in self.params:
            if p.grad is None:
                raise ValueError("optimizer step with missing gradients")
        self.t += 1
        for i, p in enumerate(self.params):
            g = p.grad
            if cfg.clip_bound is not None:
                g = np.clip(g, -cfg.clip_bound, cfg.clip_bound)
            if cfg.algorithm == "sgd":
                p.data = p.data - cfg.learning_rate * g
            else:
                self._m[i] = cfg.beta1 * self._m[i] + (1.0 - cfg.beta1) * g
                self._v[i] = cfg.beta2 * self._v[i] + (1.0 - cfg.beta2) * g * g
                m_hat = self._m[i] / (1.0 - cfg.beta1**self.t)
                v_hat = self._v[i] / (1.0 - cfg.beta2**self.t)
                p.data = p.data - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
            p.grad = None

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None


def optim_step(params: list[Tensor], config: OptimConfig, state: Optimizer | None = None) -> Optimizer:
    """One update on `params`; pass back `state` to keep Adam moments warm."""
    if state is None:
        state = Optimizer(params, config)
    state.step()
    return state
