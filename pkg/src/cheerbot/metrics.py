"""Automatic evaluation: sentence BLEU, retrieval precision at 1-of-100,
toy-LM perplexity, and mean-reward reports.

Every report carries a digest (seed, split, component hashes) sufficient
to reproduce its value bitwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .generator import GenInput, ToyGenerator
from .retrieval import BiEncoder
from .rl import evaluate_policy


@dataclass(frozen=True)
class MetricReport:
    metric: str
    value: float
    n_items: int
    digest: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "metric": self.metric,
                "value": repr(float(self.value)),
                "n_items": self.n_items,
                "digest": self.digest,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "MetricReport":
        d = json.loads(text)
        return cls(
            metric=d["metric"],
            value=float(d["value"]),
            n_items=int(d["n_items"]),
            digest=d["digest"],
        )


def _ngram_counts(tokens: list, n: int) -> dict:
    counts: dict = {}
    for i in range(len(tokens) - n + 1):
        g = tuple(tokens[i : i + n])
        counts[g] = counts.get(g, 0) + 1
    return counts


def sentence_bleu(hypothesis: list, reference: list, max_n: int = 4) -> float:
    """Geometric mean of modified n-gram precisions times the brevity
    penalty.  n=1 precision is unsmoothed (zero overlap scores 0); higher
    orders get add-one smoothing."""
    ref = list(reference)
    hyp = list(hypothesis)
    if not ref:
        raise ValueError("reference must be nonempty")
    if not hyp:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        hyp_counts = _ngram_counts(hyp, n)
        ref_counts = _ngram_counts(ref, n)
        total = max(len(hyp) - n + 1, 0)
        match = sum(min(c, ref_counts.get(g, 0)) for g, c in hyp_counts.items())
        if n == 1:
            if match == 0:
                return 0.0
            p = match / total
        else:
            p = (match + 1) / (total + 1)
        log_sum += math.log(p)
    brevity = 1.0 if len(hyp) >= len(ref) else math.exp(1.0 - len(ref) / len(hyp))
    return brevity * math.exp(log_sum / max_n)


def avg_bleu(pairs: list[tuple[list, list]], max_n: int = 4) -> float:
    """Corpus score = plain mean of the sentence scores."""
    if not pairs:
        raise ValueError("no sentence pairs to score")
    return float(np.mean([sentence_bleu(h, r, max_n) for h, r in pairs]))


def p_at_1_100(
    enc: BiEncoder,
    items: list[tuple[str, str]],
    seed: int,
    n_candidates: int = 100,
    extra_candidates: list[str] | None = None,
) -> float:
    """Fraction of items whose gold reply beats 99 seeded distractors.

    The candidate universe is the distinct gold replies across `items`
    (plus `extra_candidates`, for small eval splits); distractors are
    drawn without replacement excluding that item's gold, which itself
    always sits at list position 0.
    """
    if not items:
        raise ValueError("no evaluation items")
    universe = [reply for _, reply in items]
    if extra_candidates:
        universe.extend(extra_candidates)
    unique = list(dict.fromkeys(universe))
    if len(unique) < n_candidates:
        raise ValueError(
            f"need at least {n_candidates} distinct candidates, have {len(unique)}"
        )
    cand_vecs = enc.encode_np(unique)
    ctx_vecs = enc.encode_np([ctx for ctx, _ in items])
    idx_of = {text: i for i, text in enumerate(unique)}
    rng = np.random.default_rng(seed)
    hits = 0
    for i, (_, gold) in enumerate(items):
        gold_idx = idx_of[gold]
        draw = rng.choice(len(unique) - 1, size=n_candidates - 1, replace=False)
        distractors = np.where(draw >= gold_idx, draw + 1, draw)
        rows = np.concatenate([[gold_idx], distractors])
        scores = cand_vecs[rows] @ ctx_vecs[i]
        if int(np.argmax(scores)) == 0:
            hits += 1
    return hits / len(items)


def perplexity(gen: ToyGenerator, items: list[GenInput]) -> float:
    """exp of the mean per-token NLL over reply segments."""
    if not items:
        raise ValueError("empty test set")
    total_nll = 0.0
    total_tokens = 0
    for item in items:
        full = item.full_ids()
        start = len(full) - len(item.reply_ids)
        positions = np.arange(start, len(full), dtype=np.intp)
        probs = gen.next_token_probs(full, positions).data
        picked = probs[np.arange(len(positions)), full[positions]]
        total_nll += float(-np.log(np.maximum(picked, 1e-12)).sum())
        total_tokens += len(positions)
    if total_tokens == 0:
        raise ValueError("no reply tokens to score")
    return float(np.exp(total_nll / total_tokens))


def reward_report(
    policy,
    predictor,
    responder,
    env,
    turn_counts: tuple[int, ...] = (1, 3),
    episodes: int = 100,
    seed: int = 0,
    component_hashes: dict | None = None,
) -> list[MetricReport]:
    """Mean episode reward for each turn count, same seed per count so the
    comparison is like-for-like."""
    reports = []
    for n_turns in turn_counts:
        rng = np.random.default_rng(seed)
        stats = evaluate_policy(policy, predictor, responder, env, n_turns, episodes, rng)
        reports.append(
            MetricReport(
                metric=f"mean_reward_{n_turns}_turn",
                value=stats.mean_reward(),
                n_items=episodes,
                digest={
                    "seed": seed,
                    "n_turns": n_turns,
                    "episodes": episodes,
                    "component_hashes": component_hashes or {},
                },
            )
        )
    return reports
