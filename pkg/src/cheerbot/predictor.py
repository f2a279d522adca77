"""Next-emotion predictor: given an utterance encoding and the current
emotion as a one-hot, outputs a distribution over the response emotion.

This is the only component whose weights later move under reinforcement
learning, and there only the head layers are touched; `features` exposes
the frozen encoder output that both the policy head and the Q head read.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .catalog import EmotionCatalog, EmotionLabel
from .corpus import Vocab
from .nn import DenseNet, Tensor


@dataclass(frozen=True)
class PredictorConfig:
    embed_dim: int = 32
    encoder_dims: tuple[int, ...] = (64, 32)
    head_hidden: int = 512
    dropout: float = 0.5

    def __post_init__(self):
        if self.embed_dim < 1 or self.head_hidden < 1 or any(d < 1 for d in self.encoder_dims):
            raise ValueError("dimensions must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


class PredictorModel:
    def __init__(
        self,
        catalog: EmotionCatalog,
        vocab: Vocab,
        config: PredictorConfig = PredictorConfig(),
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
        self.encoder = DenseNet(
            [d, *config.encoder_dims], ["leaky_relu"] * len(config.encoder_dims), rng=rng
        )
        enc_out = config.encoder_dims[-1]
        self.feature_dim = enc_out + n
        self.head_hidden = DenseNet([self.feature_dim, config.head_hidden], ["relu"], rng=rng)
        self.head_out = DenseNet([config.head_hidden, n], ["softmax"], rng=rng)

    def parameters(self) -> list[Tensor]:
        return [self.embedding, *self.encoder.parameters(), *self.head_parameters()]

    def head_parameters(self) -> list[Tensor]:
        return [*self.head_hidden.parameters(), *self.head_out.parameters()]

    def _one_hot(self, labels: list[EmotionLabel]) -> np.ndarray:
        out = np.zeros((len(labels), len(self.catalog)))
        for i, lab in enumerate(labels):
            out[i, lab.id] = 1.0
        return out

    def _encode_texts(self, texts: list[str]) -> Tensor:
        bags = []
        for text in texts:
            ids = self.vocab.encode(text)
            if ids.size == 0:
                raise ValueError("cannot encode empty text")
            bags.append(ids)
        return self.encoder.forward(nn.bag_mean(self.embedding, bags))

    def head_forward(
        self,
        feats: Tensor,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        h = self.head_hidden.forward(feats)
        if training and self.config.dropout > 0.0:
            if rng is None:
                raise ValueError("training-mode forward needs an rng for dropout")
            h = nn.dropout(h, self.config.dropout, rng)
        return self.head_out.forward(h)

    def forward(
        self,
        texts: list[str],
        e_now: list[EmotionLabel],
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        if len(texts) != len(e_now) or not texts:
            raise ValueError("texts and current emotions must align and be nonempty")
        enc = self._encode_texts(texts)
        onehot = Tensor(self._one_hot(e_now))
        feats = nn.concat([enc, onehot], axis=1)
        return self.head_forward(feats, training=training, rng=rng)

    def features(self, text: str, e_now: EmotionLabel) -> np.ndarray:
        """Frozen state vector (encoding ⊕ one-hot current emotion)."""
        enc = self._encode_texts([text])
        return np.concatenate([enc.data[0], self._one_hot([e_now])[0]])

    def probs_from_features(self, feats: np.ndarray) -> np.ndarray:
        out = self.head_forward(Tensor(feats.reshape(1, -1)))
        return out.data[0].copy()


def predict_next(
    model: PredictorModel,
    text: str,
    e_now: EmotionLabel,
    mode: str = "argmax",
    rng: np.random.Generator | None = None,
    epsilon: float = 0.0,
) -> tuple[EmotionLabel, np.ndarray]:
    """Select the next emotion under `mode` ∈ {argmax, sample,
    epsilon_greedy}.  Ties always break toward the lowest label id."""
    probs = model.forward([text], [e_now]).data[0].copy()
    if mode == "argmax":
        idx = int(np.argmax(probs))
    elif mode == "sample":
        if rng is None:
            raise ValueError("sample mode needs an rng")
        idx = int(rng.choice(len(probs), p=probs / probs.sum()))
    elif mode == "epsilon_greedy":
        if rng is None:
            raise ValueError("epsilon_greedy mode needs an rng")
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if rng.random() < epsilon:
            idx = int(rng.integers(len(probs)))
        else:
            idx = int(np.argmax(probs))
    else:
        raise ValueError(f"unknown selection mode {mode!r}")
    return model.catalog.by_id(idx), probs


def predictor_train_step(
    model: PredictorModel,
    texts: list[str],
    e_now: list[EmotionLabel],
    gold_next: list[EmotionLabel],
    optimizer: nn.Optimizer,
    rng: np.random.Generator,
) -> float:
    if len(gold_next) != len(texts):
        raise ValueError("gold labels must align with texts")
    probs = model.forward(texts, e_now, training=True, rng=rng)
    targets = np.array([lab.id for lab in gold_next], dtype=np.intp)
    loss = nn.cross_entropy_loss(probs, targets)
    nn.backward(loss)
    optimizer.step()
    return float(loss.item())
