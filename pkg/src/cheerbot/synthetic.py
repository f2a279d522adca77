"""Constructed corpora and environments with known-by-design optima, used
by experiments and the quantitative test suite.

Everything here is deterministic given its seed arguments.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import EmotionCatalog, catalog_from_config
from .corpus import UtteranceRecord, Vocab, build_vocab, tokenize
from .predictor import PredictorConfig, PredictorModel
from .rl import OracleEnv, TemplateResponder
from .speaker_sim import SyntheticOracle

UPLIFT_EMOTION = "joyful"
UPLIFT_VALENCE = 0.9


def rl_catalog() -> EmotionCatalog:
    """Eight emotions where exactly one has positive valence pull (+0.9,
    deliberately not at index 0) and the rest sit at or below zero."""
    labels = ["afraid", "angry", "annoyed", "devastated", "joyful", "lonely", "sad", "guilty"]
    va = {
        "afraid": [-0.12, 0.79],
        "angry": [-0.76, 0.66],
        "annoyed": [-0.66, 0.32],
        "devastated": [-0.8, 0.1],
        "joyful": [UPLIFT_VALENCE, 0.2],
        "lonely": [-0.7, -0.28],
        "sad": [-0.9, -0.42],
        "guilty": [-0.7, 0.2],
    }
    return catalog_from_config({"labels": labels, "merges": {}, "va_seed": va})


def optimal_action_id(catalog: EmotionCatalog) -> int:
    return catalog.label(UPLIFT_EMOTION).id


def rl_vocab(catalog: EmotionCatalog) -> Vocab:
    """Covers the oracle's placeholder utterances plus the emotion names."""
    tokens = ["[", "]", "=", "v", "+", "-", "."]
    # integer and two-digit fraction parts of the "%+.2f" valence display
    tokens.extend(str(d) for d in range(10))
    tokens.extend(f"{d:02d}" for d in range(100))
    tokens.extend(name for name in catalog.names)
    return Vocab(catalog, tokens)


@dataclass
class SyntheticRlSetup:
    catalog: EmotionCatalog
    vocab: Vocab
    oracle: SyntheticOracle
    env: OracleEnv
    predictor: PredictorModel
    responder: TemplateResponder


def make_synthetic_rl_setup(
    seed: int,
    alpha: float = 0.5,
    v0: float = -0.5,
    predictor_config: PredictorConfig | None = None,
) -> SyntheticRlSetup:
    """Oracle environment where always answering with the uplift emotion is
    optimal at every turn (alpha < 1 makes early turns matter too)."""
    catalog = rl_catalog()
    vocab = rl_vocab(catalog)
    oracle = SyntheticOracle(catalog, alpha=alpha, noise_sigma=0.0, v0=v0)
    config = predictor_config or PredictorConfig(
        embed_dim=12, encoder_dims=(16, 12), head_hidden=32, dropout=0.5
    )
    predictor = PredictorModel(catalog, vocab, config, rng=np.random.default_rng(seed))
    return SyntheticRlSetup(
        catalog=catalog,
        vocab=vocab,
        oracle=oracle,
        env=OracleEnv(oracle),
        predictor=predictor,
        responder=TemplateResponder(),
    )


def optimal_reward(alpha: float, v0: float, n_turns: int, target: float = UPLIFT_VALENCE) -> float:
    """Closed-form episode reward when every action is the uplift emotion."""
    v = v0
    for _ in range(n_turns):
        v = v + alpha * (target - v)
    return v - v0


def _label_sentences(name: str, label_id: int, per_label: int) -> list[str]:
    base = f"kw{label_id} mark{label_id} {name}"
    return [f"{base} sample {j} today" for j in range(per_label)]


def emotion_corpus(
    catalog: EmotionCatalog, per_label: int = 6, labels: list[str] | None = None
) -> list[UtteranceRecord]:
    """One keyword cluster per emotion; linearly separable by construction."""
    names = labels if labels is not None else catalog.names
    records = []
    for name in names:
        lab = catalog.label(name)
        for j, text in enumerate(_label_sentences(name, lab.id, per_label)):
            records.append(
                UtteranceRecord(
                    conv_id=f"{name}-{j}",
                    turn_idx=0,
                    role="speaker",
                    text=text,
                    situation_emotion=lab,
                    situation_prompt=f"talking about feeling {name}",
                )
            )
    return records


def bootstrap_corpus(
    catalog: EmotionCatalog, per_label: int = 6
) -> tuple[list[UtteranceRecord], list[UtteranceRecord], dict[str, str]]:
    """(seed records, non-seed records, partner map).

    Non-seed labels reuse a seed partner's sentences verbatim, so a
    detector trained on the seed records places them at the partner's VA:
    the partner VA is the planted centroid for the pseudo-label step.
    """
    seed_names = [lab.name for lab in catalog if catalog.has_va(lab)]
    other_names = [lab.name for lab in catalog if not catalog.has_va(lab)]
    if not seed_names:
        raise ValueError("catalog has no seeded labels")
    seed_records = emotion_corpus(catalog, per_label, labels=seed_names)
    partner_map = {
        name: seed_names[i % len(seed_names)] for i, name in enumerate(other_names)
    }
    non_seed_records = []
    for name, partner in partner_map.items():
        lab = catalog.label(name)
        partner_lab = catalog.label(partner)
        for j, text in enumerate(
            _label_sentences(partner, partner_lab.id, per_label)
        ):
            non_seed_records.append(
                UtteranceRecord(
                    conv_id=f"{name}-{j}",
                    turn_idx=0,
                    role="speaker",
                    text=text,
                    situation_emotion=lab,
                    situation_prompt=f"talking about feeling {name}",
                )
            )
    return seed_records, non_seed_records, partner_map


def clustered_retrieval_corpus(
    n_clusters: int = 25, per_cluster: int = 8
) -> tuple[list[str], list[str], list[int]]:
    """(contexts, gold replies, cluster ids); context i and reply i share a
    unique item token plus their cluster's topic tokens."""
    contexts, replies, clusters = [], [], []
    item = 0
    for c in range(n_clusters):
        for _ in range(per_cluster):
            contexts.append(f"item{item} topic{c} ask about topic{c}")
            replies.append(f"item{item} reply{c} about topic{c} indeed")
            clusters.append(c)
            item += 1
    return contexts, replies, clusters


def ed_style_records(
    catalog: EmotionCatalog, n_convs: int = 12, turns_per_conv: int = 4
) -> list[UtteranceRecord]:
    """Small conversation set cycling through the catalog's emotions, with
    the even/odd speaker-listener parity of the real data."""
    records = []
    names = catalog.names
    for c in range(n_convs):
        name = names[c % len(names)]
        lab = catalog.label(name)
        prompt = f"i was feeling {name} about day {c}"
        for t in range(turns_per_conv):
            side = "speaker" if t % 2 == 0 else "listener"
            text = f"{side} line {t} kw{lab.id} {name} conv {c}"
            records.append(
                UtteranceRecord(
                    conv_id=f"conv{c}",
                    turn_idx=t,
                    role=side,
                    text=text,
                    situation_emotion=lab,
                    situation_prompt=prompt,
                )
            )
    return records


def write_ed_csv(records: list[UtteranceRecord], path: str | Path) -> None:
    """Serialize records back to the ingestion CSV shape (raw label names
    are fine since canonical names resolve to themselves)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["conv_id", "utterance_idx", "context", "prompt", "utterance"])
        for r in records:
            writer.writerow(
                [
                    r.conv_id,
                    r.turn_idx + 1,
                    r.situation_emotion.name,
                    r.situation_prompt.replace(",", "_comma_"),
                    r.text.replace(",", "_comma_"),
                ]
            )


def vocab_for_records(
    records: list[UtteranceRecord], catalog: EmotionCatalog, min_count: int = 1
) -> Vocab:
    return build_vocab(records, catalog, min_count=min_count)
