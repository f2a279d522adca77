"""Loss functions: classification NLL, VA regression, smooth L1, binary CE,
and the in-batch retrieval NLL.

All losses take probabilities or scores as tape tensors and return a scalar
tape tensor, so they compose with `autograd.backward` and the gradient
checker.  Zero target probabilities are replaced by a large finite floor
(PROB_FLOOR, loss cap ln 1e12) so downstream reward computations never see
non-finite values.
"""

from __future__ import annotations

import numpy as np

from . import autograd as ag
from .autograd import Tensor

PROB_FLOOR = 1e-12


def cross_entropy_loss(probs: Tensor, targets) -> Tensor:
    """Mean negative log-likelihood of the target classes.

    `probs` is (batch, classes) of probabilities; rows must sum to 1 within
    1e-9.  Targets at zero probability hit the PROB_FLOOR cap instead of
    producing infinities.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=np.intp))
    if probs.data.ndim != 2:
        raise ValueError("probs must be (batch, classes)")
    n, c = probs.data.shape
    if targets.shape != (n,):
        raise ValueError("one target per batch row")
    if np.any(targets < 0) or np.any(targets >= c):
        raise ValueError("target class out of range")
    row_sums = probs.data.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > 1e-9):
        raise ValueError("probs rows must sum to 1")
    picked = ag.gather_cols(probs, targets)
    return ag.mean(ag.mul(ag.log(ag.clamp_min(picked, PROB_FLOOR)), -1.0))


def va_l2_loss(pred_va: Tensor, gold_va) -> Tensor:
    """Mean over the batch of squared valence error plus squared arousal error."""
    gold = np.atleast_2d(np.asarray(gold_va, dtype=np.float64))
    if pred_va.data.ndim != 2 or pred_va.data.shape[1] != 2:
        raise ValueError("pred_va must be (batch, 2)")
    if gold.shape != pred_va.data.shape:
        raise ValueError("batch size mismatch")
    if gold.shape[0] == 0:
        raise ValueError("empty batch")
    d = ag.sub(pred_va, gold)
    return ag.mean(ag.sum_(ag.mul(d, d), axis=1))


def smooth_l1_loss(pred: Tensor, target) -> Tensor:
    """Huber-style loss: 0.5 d^2 for |d| < 1, |d| - 0.5 otherwise (mean)."""
    return ag.mean(ag.smooth_l1(pred, target))


def binary_cross_entropy(probs: Tensor, targets) -> Tensor:
    """Mean BCE over probabilities in (0, 1); targets are 0/1."""
    t = np.asarray(targets, dtype=np.float64)
    p = ag.clamp_min(probs, PROB_FLOOR)
    q = ag.clamp_min(ag.sub(1.0, probs), PROB_FLOOR)
    pos = ag.mul(ag.log(p), t)
    neg = ag.mul(ag.log(q), 1.0 - t)
    return ag.mul(ag.mean(ag.add(pos, neg)), -1.0)


def in_batch_nll(scores: Tensor) -> Tensor:
    """Mean -log softmax(scores)[i, i] with the batch as candidate set.

    `scores` is the (B, B) matrix of context-candidate dot products; row i's
    gold candidate sits on the diagonal.  Needs B >= 2 so each row has at
    least one negative.
    """
    n = scores.data.shape[0]
    if scores.data.ndim != 2 or scores.data.shape[1] != n:
        raise ValueError("scores must be square (batch x batch)")
    if n < 2:
        raise ValueError("need batch size >= 2 for in-batch negatives")
    sm = ag.softmax(scores)
    diag = ag.gather_cols(sm, np.arange(n))
    return ag.mean(ag.mul(ag.log(ag.clamp_min(diag, PROB_FLOOR)), -1.0))
