"""Central finite-difference verification of tape gradients."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import autograd as ag
from .autograd import Tensor


def grad_check(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    epsilon: float = 1e-5,
) -> float:
    """Worst relative error between tape and finite-difference gradients.

    `loss_fn` must rebuild the forward graph on every call.  Every component
    of every parameter is perturbed by +/- epsilon.  Relative error uses
    |a - b| / max(1, |a|, |b|) so near-zero gradients compare absolutely.
    An empty parameter list passes vacuously with error 0.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError("epsilon must be in [1e-7, 1e-3]")
    params = list(params)
    saved_grads = [p.grad for p in params]
    for p in params:
        p.grad = None

    loss = loss_fn()
    ag.backward(loss)
    tape_grads = []
    for p in params:
        tape_grads.append(np.zeros_like(p.data) if p.grad is None else p.grad.copy())
        p.grad = None

    worst = 0.0
    for p, tg in zip(params, tape_grads):
        flat = p.data.reshape(-1)
        gflat = tg.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + epsilon
            f_plus = loss_fn().item()
            flat[j] = orig - epsilon
            f_minus = loss_fn().item()
            flat[j] = orig
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise FloatingPointError("non-finite intermediate in finite difference")
            fd = (f_plus - f_minus) / (2.0 * epsilon)
            a, b = fd, gflat[j]
            err = abs(a - b) / max(1.0, abs(a), abs(b))
            if err > worst:
                worst = err

    for p, g in zip(params, saved_grads):
        p.grad = g
    return worst
