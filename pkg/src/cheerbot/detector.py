"""Emotion detector: discrete emotion classification plus a bounded
valence-arousal regression head over mean-pooled word embeddings, and the
pseudo-label procedure that completes the catalog's VA table.

Joint objective per batch: total = class_loss + lambda_va * va_loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .catalog import EmotionCatalog, EmotionLabel, VAPoint
from .corpus import UtteranceRecord, Vocab
from .nn import DenseNet, Tensor

_EVAL_BATCH = 256


@dataclass(frozen=True)
class DetectorConfig:
    embed_dim: int = 32
    encoder_dims: tuple[int, ...] = (64, 32)
    lambda_va: float = 1.0

    def __post_init__(self):
        if self.embed_dim < 1 or any(d < 1 for d in self.encoder_dims):
            raise ValueError("dimensions must be positive")
        if len(self.encoder_dims) < 1:
            raise ValueError("encoder needs at least one layer")
        if self.lambda_va < 0:
            raise ValueError("lambda_va must be >= 0")


@dataclass(frozen=True)
class DetectorOutput:
    probs: np.ndarray
    dominant: EmotionLabel
    va: VAPoint


class DetectorModel:
    """Mean-pooled embedding encoder with a softmax class head and a
    tanh-bounded VA head.  `rng=None` gives the zero-initialized variant
    (uniform class probabilities, VA at the origin)."""

    def __init__(
        self,
        catalog: EmotionCatalog,
        vocab: Vocab,
        config: DetectorConfig = DetectorConfig(),
        rng: np.random.Generator | None = None,
    ):
        self.catalog = catalog
        self.vocab = vocab
        self.config = config
        n = len(catalog)
        d = config.embed_dim
        if rng is None:
            emb = np.zeros((vocab.size, d))
        else:
            emb = rng.standard_normal((vocab.size, d)) / np.sqrt(d)
        self.embedding = Tensor(emb, requires_grad=True)
        dims = [d, *config.encoder_dims]
        self.encoder = DenseNet(dims, ["leaky_relu"] * len(config.encoder_dims), rng=rng)
        enc_out = config.encoder_dims[-1]
        self.class_head = DenseNet([enc_out, n], ["softmax"], rng=rng)
        self.va_head = DenseNet([enc_out, 2], ["tanh"], rng=rng)

    def parameters(self) -> list[Tensor]:
        return [
            self.embedding,
            *self.encoder.parameters(),
            *self.class_head.parameters(),
            *self.va_head.parameters(),
        ]

    def _bags(self, texts: list[str]) -> list[np.ndarray]:
        bags = []
        for text in texts:
            ids = self.vocab.encode(text)
            if ids.size == 0:
                raise ValueError("cannot detect emotion of empty text")
            bags.append(ids)
        return bags

    def encode(self, texts: list[str]) -> Tensor:
        pooled = nn.bag_mean(self.embedding, self._bags(texts))
        return self.encoder.forward(pooled)

    def forward(self, texts: list[str]) -> tuple[Tensor, Tensor]:
        """(class probabilities, VA coordinates) for a batch of texts."""
        feats = self.encode(texts)
        return self.class_head.forward(feats), self.va_head.forward(feats)


def detect(model: DetectorModel, text: str) -> DetectorOutput:
    probs_t, va_t = model.forward([text])
    probs = probs_t.data[0].copy()
    dominant = model.catalog.by_id(int(np.argmax(probs)))
    va = VAPoint(float(va_t.data[0, 0]), float(va_t.data[0, 1]))
    return DetectorOutput(probs=probs, dominant=dominant, va=va)


def detector_loss(
    model: DetectorModel, texts: list[str], gold: list[EmotionLabel]
) -> tuple[Tensor, Tensor, Tensor]:
    """(total, class CE, VA L2) as graph nodes; VA targets come from the
    catalog, so every gold label must carry a VA entry."""
    if len(texts) != len(gold) or not texts:
        raise ValueError("texts and gold labels must align and be nonempty")
    probs, va = model.forward(texts)
    targets = np.array([lab.id for lab in gold], dtype=np.intp)
    gold_va = np.array([[p.valence, p.arousal] for p in (model.catalog.va_of(g) for g in gold)])
    class_loss = nn.cross_entropy_loss(probs, targets)
    va_loss = nn.va_l2_loss(va, gold_va)
    lam = model.config.lambda_va
    total = class_loss + nn.mul(Tensor(np.asarray(lam)), va_loss)
    return total, class_loss, va_loss


def detector_train_step(
    model: DetectorModel,
    texts: list[str],
    gold: list[EmotionLabel],
    optimizer: nn.Optimizer,
) -> tuple[float, float, float]:
    total, class_loss, va_loss = detector_loss(model, texts, gold)
    nn.backward(total)
    optimizer.step()
    return float(total.item()), float(class_loss.item()), float(va_loss.item())


def va_head_outputs(model: DetectorModel, texts: list[str]) -> np.ndarray:
    """VA head evaluated in chunks without building a graph tape."""
    chunks = []
    for i in range(0, len(texts), _EVAL_BATCH):
        _, va = model.forward(texts[i : i + _EVAL_BATCH])
        chunks.append(va.data)
    return np.concatenate(chunks, axis=0)


def bootstrap_va_table(
    seed_model: DetectorModel, catalog: EmotionCatalog, records: list[UtteranceRecord]
) -> EmotionCatalog:
    """Complete the VA table: each label without a seed entry gets the mean
    of the seed-trained VA head over its utterances, clamped to bounds.
    Labels that already have entries are left untouched."""
    texts_by_label: dict[str, list[str]] = {}
    for r in records:
        texts_by_label.setdefault(r.situation_emotion.name, []).append(r.text)
    entries: dict[str, VAPoint] = {}
    for lab in catalog:
        if catalog.has_va(lab):
            continue
        texts = texts_by_label.get(lab.name, [])
        if not texts:
            raise ValueError(f"no utterances to bootstrap VA for label {lab.name!r}")
        mean_va = va_head_outputs(seed_model, texts).mean(axis=0)
        entries[lab.name] = VAPoint(float(mean_va[0]), float(mean_va[1]))
    return catalog.with_va_entries(entries)
