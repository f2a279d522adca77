"""Bi-encoder retrieval: contexts and candidates share one encoder, scores
are dot products, training uses the other in-batch replies as negatives.

The emotion filter restricts candidates to one pool group; an empty group
falls back to the unfiltered ranking with a flag rather than failing the
conversation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import nn
from .catalog import EmotionLabel
from .corpus import CandidatePool, Vocab
from .nn import DenseNet, Tensor, params_hash

_ENC_BATCH = 256
CACHE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class RetrievalConfig:
    embed_dim: int = 32
    encoder_dims: tuple[int, ...] = (64, 32)

    def __post_init__(self):
        if self.embed_dim < 1 or any(d < 1 for d in self.encoder_dims):
            raise ValueError("dimensions must be positive")


class BiEncoder:
    """One embedding + MLP used for both sides; `context_encoder` and
    `candidate_encoder` are views of the same network."""

    def __init__(
        self,
        vocab: Vocab,
        config: RetrievalConfig = RetrievalConfig(),
        rng: np.random.Generator | None = None,
    ):
        self.vocab = vocab
        self.config = config
        d = config.embed_dim
        if rng is None:
            emb = np.zeros((vocab.size, d))
        else:
            emb = rng.standard_normal((vocab.size, d)) / np.sqrt(d)
        self.embedding = Tensor(emb, requires_grad=True)
        self.encoder = DenseNet(
            [d, *config.encoder_dims], ["leaky_relu"] * len(config.encoder_dims), rng=rng
        )
        self.dim = config.encoder_dims[-1]

    @property
    def context_encoder(self) -> DenseNet:
        return self.encoder

    @property
    def candidate_encoder(self) -> DenseNet:
        return self.encoder

    def parameters(self) -> list[Tensor]:
        return [self.embedding, *self.encoder.parameters()]

    def encode(self, texts: list[str]) -> Tensor:
        bags = []
        for text in texts:
            ids = self.vocab.encode(text)
            if ids.size == 0:
                raise ValueError("cannot encode empty text")
            bags.append(ids)
        return self.encoder.forward(nn.bag_mean(self.embedding, bags))

    def encode_np(self, texts: list[str]) -> np.ndarray:
        chunks = []
        for i in range(0, len(texts), _ENC_BATCH):
            chunks.append(self.encode(texts[i : i + _ENC_BATCH]).data)
        return np.concatenate(chunks, axis=0)


@dataclass(frozen=True)
class RetrievalResult:
    indices: list[int]
    scores: list[float]
    fallback: bool = False


def retrieval_train_step(
    enc: BiEncoder, contexts: list[str], gold_replies: list[str], optimizer: nn.Optimizer
) -> float:
    """In-batch softmax NLL over the B×B score matrix; needs B >= 2 so
    that every row has at least one negative."""
    if len(contexts) != len(gold_replies):
        raise ValueError("contexts and replies must align")
    if len(contexts) < 2:
        raise ValueError("batch must have at least 2 items to form in-batch negatives")
    h_x = enc.encode(contexts)
    h_y = enc.encode(gold_replies)
    scores = nn.matmul(h_x, nn.transpose(h_y))
    loss = nn.in_batch_nll(scores)
    nn.backward(loss)
    optimizer.step()
    return float(loss.item())


def encode_pool(enc: BiEncoder, pool: CandidatePool) -> np.ndarray:
    """Materialize candidate embeddings into the pool entries."""
    if len(pool) == 0:
        return np.zeros((0, enc.dim))
    vectors = enc.encode_np([e.text for e in pool.entries])
    for entry, vec in zip(pool.entries, vectors):
        entry.embedding = vec
    return vectors


def _pool_matrix(pool: CandidatePool) -> np.ndarray:
    rows = []
    for i, entry in enumerate(pool.entries):
        if entry.embedding is None:
            raise ValueError(f"pool entry {i} has no embedding; run encode_pool first")
        rows.append(entry.embedding)
    return np.stack(rows, axis=0)


def retrieve(
    enc: BiEncoder,
    pool: CandidatePool,
    context_text: str,
    e_next: EmotionLabel | None = None,
    k: int = 1,
) -> RetrievalResult:
    """Top-k candidates by dot product, optionally restricted to the
    requested emotion group.  Ties break toward the lower entry index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(pool) == 0:
        raise ValueError("cannot retrieve from an empty pool")
    matrix = _pool_matrix(pool)
    query = enc.encode_np([context_text])[0]
    scores = matrix @ query

    fallback = False
    if e_next is not None:
        eligible = pool.by_emotion.get(e_next.name, [])
        if not eligible:
            fallback = True
            eligible = list(range(len(pool)))
    else:
        eligible = list(range(len(pool)))

    eligible = np.asarray(eligible, dtype=np.intp)
    order = np.argsort(-scores[eligible], kind="stable")[:k]
    chosen = eligible[order]
    return RetrievalResult(
        indices=[int(i) for i in chosen],
        scores=[float(scores[i]) for i in chosen],
        fallback=fallback,
    )


def pool_hash(pool: CandidatePool) -> str:
    payload = json.dumps(
        {"side": pool.side, "entries": [[e.text, e.emotion.name] for e in pool.entries]},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def save_pool_cache(path, pool: CandidatePool, enc: BiEncoder) -> None:
    vectors = [[repr(float(v)) for v in row] for row in _pool_matrix(pool)]
    doc = {
        "format_version": CACHE_FORMAT_VERSION,
        "pool_hash": pool_hash(pool),
        "encoder_checkpoint_hash": params_hash(enc.parameters()),
        "vectors": vectors,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_pool_cache(path, pool: CandidatePool, enc: BiEncoder) -> np.ndarray:
    """Restore cached embeddings; refuses stale caches (pool or encoder
    changed since the cache was written)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != CACHE_FORMAT_VERSION:
        raise ValueError(f"unsupported pool cache version {doc.get('format_version')!r}")
    if doc["pool_hash"] != pool_hash(pool):
        raise ValueError("pool cache is stale: candidate pool changed")
    if doc["encoder_checkpoint_hash"] != params_hash(enc.parameters()):
        raise ValueError("pool cache is stale: encoder parameters changed")
    vectors = np.array([[float(s) for s in row] for row in doc["vectors"]])
    if vectors.shape != (len(pool), enc.dim):
        raise ValueError("pool cache vector shape mismatch")
    for entry, vec in zip(pool.entries, vectors):
        entry.embedding = vec
    return vectors
