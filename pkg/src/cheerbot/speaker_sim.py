"""Simulated human speaker for training rollouts.

Two interchangeable backends: retrieval over the speaker-side utterance
pool conditioned on the situation prompt, and a synthetic oracle whose
scalar valence state is pulled toward the valence of whatever emotion the
listener expresses.  The oracle tags its placeholder utterances with the
emotion nearest its state, so rollouts can skip the detector and read the
reward directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import EmotionCatalog, EmotionLabel
from .corpus import ROLE_SPEAKER, CandidatePool, DialogueContext
from .retrieval import BiEncoder, retrieve


@dataclass(frozen=True)
class SpeakerTurn:
    text: str
    emotion: EmotionLabel | None = None
    valence: float | None = None


class RetrievalSpeaker:
    """Greedy top-1 retrieval over speaker-side utterances; the situation
    prompt is prepended to the query so reactions stay on-scenario."""

    def __init__(self, encoder: BiEncoder, pool: CandidatePool):
        if pool.side != ROLE_SPEAKER:
            raise ValueError(f"speaker backend needs a speaker-side pool, got {pool.side!r}")
        if len(pool) == 0:
            raise ValueError("speaker pool is empty")
        self.encoder = encoder
        self.pool = pool

    def open(self, situation: str) -> SpeakerTurn:
        return self.react(None, situation)

    def react(self, history: DialogueContext | None, situation: str) -> SpeakerTurn:
        text = react_retrieval(self, history, situation, k=1)
        return SpeakerTurn(text=text)


def react_retrieval(
    speaker: RetrievalSpeaker, history: DialogueContext | None, situation: str, k: int = 1
) -> str:
    parts = [situation]
    if history is not None:
        parts.extend(history.texts())
    query = " ".join(p for p in parts if p)
    result = retrieve(speaker.encoder, speaker.pool, query, e_next=None, k=k)
    return speaker.pool.entries[result.indices[0]].text


def nearest_emotion_by_valence(catalog: EmotionCatalog, v: float) -> EmotionLabel:
    """Catalog label whose valence is closest to v; lowest id wins ties.
    Only labels with an assigned VA participate."""
    best = None
    best_dist = None
    for lab in catalog:
        if not catalog.has_va(lab):
            continue
        dist = abs(catalog.va_of(lab).valence - v)
        if best_dist is None or dist < best_dist:
            best, best_dist = lab, dist
    if best is None:
        raise ValueError("catalog has no labels with VA entries")
    return best


class SyntheticOracle:
    """Scalar valence state on [-1, 1]; each listener emotion pulls it by
    alpha toward that emotion's valence, optionally with Gaussian noise.

    One instance serves one episode at a time: call reset() between
    episodes.  With noise_sigma 0 transitions are a pure function of
    (state, emotion).
    """

    def __init__(
        self,
        catalog: EmotionCatalog,
        alpha: float = 0.5,
        noise_sigma: float = 0.0,
        v0: float = -0.5,
        rng: np.random.Generator | None = None,
    ):
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if not -1.0 <= v0 <= 1.0:
            raise ValueError("v0 must be in [-1, 1]")
        if noise_sigma > 0.0 and rng is None:
            raise ValueError("noisy oracle needs an rng")
        self.catalog = catalog
        self.alpha = alpha
        self.noise_sigma = noise_sigma
        self.v0 = v0
        self.rng = rng
        self.v = v0

    def _utterance(self) -> str:
        name = nearest_emotion_by_valence(self.catalog, self.v).name
        return f"[v={self.v:+.2f}] {name}"

    def _turn(self) -> SpeakerTurn:
        return SpeakerTurn(
            text=self._utterance(),
            emotion=nearest_emotion_by_valence(self.catalog, self.v),
            valence=self.v,
        )

    def reset(self) -> SpeakerTurn:
        self.v = self.v0
        return self._turn()

    def open(self, situation: str = "") -> SpeakerTurn:
        return self.reset()

    def react(self, listener_emotion: EmotionLabel) -> SpeakerTurn:
        target = self.catalog.va_of(listener_emotion).valence
        v_next = self.v + self.alpha * (target - self.v)
        if self.noise_sigma > 0.0:
            v_next += self.noise_sigma * self.rng.standard_normal()
        self.v = float(np.clip(v_next, -1.0, 1.0))
        return self._turn()


def react_synthetic(
    oracle: SyntheticOracle, listener_emotion: EmotionLabel
) -> tuple[float, str]:
    turn = oracle.react(listener_emotion)
    return turn.valence, turn.text
