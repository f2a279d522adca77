"""Toy generative branch: a fixed-window feedforward next-token model over
the concatenated [persona, emotion token, history, reply] sequence, with a
next-sentence head (gold reply vs. sampled distractor) and an emotion head
on the pooled encoding.

Training loss is the plain sum L = L_LM + L_NSP + L_ESG.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .catalog import EmotionCatalog, EmotionLabel
from .corpus import EOS_ID, PAD_ID, DialogueContext, Vocab, tokenize
from .nn import DenseNet, Tensor

DEFAULT_PERSONA = "i like to help people ."


@dataclass(frozen=True)
class GenConfig:
    window: int = 3
    embed_dim: int = 24
    lm_hidden: int = 64
    max_len: int = 96
    persona: str = DEFAULT_PERSONA

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.embed_dim < 1 or self.lm_hidden < 1:
            raise ValueError("dimensions must be positive")
        if self.max_len < 2:
            raise ValueError("max_len must allow at least one reply token")
        if not tokenize(self.persona):
            raise ValueError("persona must tokenize to at least one token")


@dataclass(frozen=True)
class GenInput:
    """Token-id segments in their fixed concatenation order."""

    persona_ids: tuple[int, ...]
    emotion_token_id: int
    history_ids: tuple[int, ...]
    reply_ids: tuple[int, ...]

    def full_ids(self) -> np.ndarray:
        return np.asarray(
            [*self.persona_ids, self.emotion_token_id, *self.history_ids, *self.reply_ids],
            dtype=np.intp,
        )

    def prefix_ids(self) -> np.ndarray:
        return np.asarray(
            [*self.persona_ids, self.emotion_token_id, *self.history_ids], dtype=np.intp
        )


def build_gen_input(
    vocab: Vocab,
    config: GenConfig,
    emotion: EmotionLabel,
    history_text: str,
    reply_text: str,
    append_eos: bool = True,
) -> GenInput:
    reply_ids = list(vocab.encode(reply_text))
    if not reply_ids:
        raise ValueError("reply segment must be nonempty")
    if append_eos:
        reply_ids.append(EOS_ID)
    item = GenInput(
        persona_ids=tuple(int(i) for i in vocab.encode(config.persona)),
        emotion_token_id=vocab.emotion_id(emotion),
        history_ids=tuple(int(i) for i in vocab.encode(history_text)),
        reply_ids=tuple(int(i) for i in reply_ids),
    )
    total = len(item.full_ids())
    if total > config.max_len:
        raise ValueError(f"sequence of {total} tokens exceeds max_len {config.max_len}")
    return item


class ToyGenerator:
    """Shared embeddings feed three heads: the windowed LM, a sigmoid
    next-sentence scorer, and an emotion classifier, the latter two over
    the mean-pooled sequence encoding."""

    def __init__(
        self,
        catalog: EmotionCatalog,
        vocab: Vocab,
        config: GenConfig = GenConfig(),
        rng: np.random.Generator | None = None,
    ):
        self.catalog = catalog
        self.vocab = vocab
        self.config = config
        d = config.embed_dim
        if rng is None:
            emb = np.zeros((vocab.size, d))
        else:
            emb = rng.standard_normal((vocab.size, d)) / np.sqrt(d)
        self.embedding = Tensor(emb, requires_grad=True)
        self.lm_head = DenseNet(
            [config.window * d, config.lm_hidden, vocab.size], ["relu", "softmax"], rng=rng
        )
        self.nsp_head = DenseNet([d, 1], ["identity"], rng=rng)
        self.esg_head = DenseNet([d, len(catalog)], ["softmax"], rng=rng)

    def parameters(self) -> list[Tensor]:
        return [
            self.embedding,
            *self.lm_head.parameters(),
            *self.nsp_head.parameters(),
            *self.esg_head.parameters(),
        ]

    def _windows(self, ids: np.ndarray, positions: np.ndarray) -> np.ndarray:
        """Window of the `window` ids preceding each position, left-padded."""
        w = self.config.window
        padded = np.concatenate([np.full(w, PAD_ID, dtype=np.intp), ids])
        return np.stack([padded[p : p + w] for p in positions], axis=0)

    def next_token_probs(self, ids: np.ndarray, positions: np.ndarray) -> Tensor:
        windows = self._windows(np.asarray(ids, dtype=np.intp), np.asarray(positions, np.intp))
        cols = [nn.gather_rows(self.embedding, windows[:, j]) for j in range(self.config.window)]
        return self.lm_head.forward(nn.concat(cols, axis=1))

    def pooled(self, ids: np.ndarray) -> Tensor:
        return nn.bag_mean(self.embedding, [np.asarray(ids, dtype=np.intp)])

    def nsp_prob(self, ids: np.ndarray) -> Tensor:
        return nn.sigmoid(self.nsp_head.forward(self.pooled(ids)))

    def esg_probs(self, ids: np.ndarray) -> Tensor:
        return self.esg_head.forward(self.pooled(ids))


def lm_loss(gen: ToyGenerator, item: GenInput) -> Tensor:
    """Mean next-token NLL over the reply segment only."""
    full = item.full_ids()
    start = len(full) - len(item.reply_ids)
    positions = np.arange(start, len(full), dtype=np.intp)
    probs = gen.next_token_probs(full, positions)
    targets = full[positions]
    return nn.cross_entropy_loss(probs, targets)


def gen_losses(
    gen: ToyGenerator, item: GenInput, distractor_reply: tuple[int, ...], gold_emotion: EmotionLabel
) -> tuple[Tensor, Tensor, Tensor, Tensor]:
    if not item.reply_ids:
        raise ValueError("reply segment must be nonempty")
    if tuple(distractor_reply) == tuple(item.reply_ids):
        raise ValueError("distractor must differ from the gold reply")

    l_lm = lm_loss(gen, item)

    gold_ids = item.full_ids()
    distract = GenInput(
        persona_ids=item.persona_ids,
        emotion_token_id=item.emotion_token_id,
        history_ids=item.history_ids,
        reply_ids=tuple(int(i) for i in distractor_reply),
    )
    pair = nn.concat([gen.nsp_prob(gold_ids), gen.nsp_prob(distract.full_ids())], axis=0)
    l_nsp = nn.binary_cross_entropy(pair, np.array([[1.0], [0.0]]))

    esg = gen.esg_probs(gold_ids)
    l_esg = nn.cross_entropy_loss(esg, np.array([gold_emotion.id], dtype=np.intp))

    total = l_lm + l_nsp + l_esg
    return total, l_lm, l_nsp, l_esg


def gen_train_step(
    gen: ToyGenerator,
    item: GenInput,
    distractor_reply: tuple[int, ...],
    gold_emotion: EmotionLabel,
    optimizer: nn.Optimizer,
) -> tuple[float, float, float, float]:
    total, l_lm, l_nsp, l_esg = gen_losses(gen, item, distractor_reply, gold_emotion)
    nn.backward(total)
    optimizer.step()
    return (float(total.item()), float(l_lm.item()), float(l_nsp.item()), float(l_esg.item()))


def generate(
    gen: ToyGenerator,
    context: DialogueContext | str,
    e_next: EmotionLabel,
    max_len: int = 20,
    mode: str = "greedy",
    k: int = 5,
    rng: np.random.Generator | None = None,
) -> str:
    """Decode from [persona, emotion, history]; stops at the end token or
    after max_len generated tokens."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    history_text = context.joined() if isinstance(context, DialogueContext) else context
    ids = [
        *gen.vocab.encode(gen.config.persona),
        gen.vocab.emotion_id(e_next),
        *gen.vocab.encode(history_text),
    ]
    out: list[int] = []
    for _ in range(max_len):
        probs = gen.next_token_probs(
            np.asarray(ids, dtype=np.intp), np.asarray([len(ids)], dtype=np.intp)
        ).data[0]
        if mode == "greedy":
            nxt = int(np.argmax(probs))
        elif mode == "topk":
            if rng is None:
                raise ValueError("topk mode needs an rng")
            if k < 1:
                raise ValueError("k must be >= 1")
            top = np.argsort(-probs, kind="stable")[:k]
            weights = probs[top] / probs[top].sum()
            nxt = int(rng.choice(top, p=weights))
        else:
            raise ValueError(f"unknown decode mode {mode!r}")
        if nxt == EOS_ID:
            break
        out.append(nxt)
        ids.append(nxt)
    return gen.vocab.decode(out)
