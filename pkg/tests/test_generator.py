"""Windowed toy generator: input assembly, loss sum, decoding."""

import math

import numpy as np
import pytest

from cheerbot import nn
from cheerbot.corpus import EOS_ID, PAD_ID
from cheerbot.generator import (
    GenConfig,
    ToyGenerator,
    build_gen_input,
    gen_losses,
    gen_train_step,
    generate,
    lm_loss,
)
from cheerbot.synthetic import emotion_corpus, vocab_for_records

CFG = GenConfig(window=3, embed_dim=10, lm_hidden=16, max_len=64)


@pytest.fixture(scope="module")
def setup(full_catalog):
    records = emotion_corpus(full_catalog, per_label=2)
    vocab = vocab_for_records(records, full_catalog)
    return vocab


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(window=0)
    with pytest.raises(ValueError):
        GenConfig(max_len=1)
    with pytest.raises(ValueError):
        GenConfig(persona="   ")


def test_build_gen_input_segment_order(full_catalog, setup):
    vocab = setup
    emotion = full_catalog.label("joyful")
    item = build_gen_input(vocab, CFG, emotion, "kw0 mark0", "kw1 today")
    full = item.full_ids()
    n_persona = len(item.persona_ids)
    assert full[n_persona] == vocab.emotion_id(emotion)
    assert tuple(full[: n_persona]) == item.persona_ids
    assert full[-1] == EOS_ID  # appended end marker
    assert tuple(full[-len(item.reply_ids):]) == item.reply_ids
    # prefix excludes the reply segment
    assert len(item.prefix_ids()) + len(item.reply_ids) == len(full)


def test_build_gen_input_errors(full_catalog, setup):
    vocab = setup
    emotion = full_catalog.label("joyful")
    with pytest.raises(ValueError):
        build_gen_input(vocab, CFG, emotion, "hist", "   ")
    tight = GenConfig(window=3, embed_dim=10, lm_hidden=16, max_len=8)
    with pytest.raises(ValueError, match="max_len"):
        build_gen_input(vocab, tight, emotion, "kw0 mark0 kw1 mark1 kw2", "kw3 kw4")


def test_windows_left_pad_before_sequence_start(full_catalog, setup):
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=None)
    ids = np.array([7, 8, 9, 10], dtype=np.intp)
    win = gen._windows(ids, np.array([0, 1, 3], dtype=np.intp))
    # window p holds the ids strictly before position p
    assert win.tolist() == [
        [PAD_ID, PAD_ID, PAD_ID],
        [PAD_ID, PAD_ID, 7],
        [7, 8, 9],
    ]


def test_lm_positions_cover_reply_only(full_catalog, setup):
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=None)
    emotion = full_catalog.label("joyful")
    item = build_gen_input(vocab, CFG, emotion, "kw0 mark0", "kw1")
    # zero-init model: every next-token distribution is uniform over V
    loss = lm_loss(gen, item)
    assert abs(loss.item() - math.log(vocab.size)) <= 1e-9


def test_loss_total_is_component_sum(full_catalog, setup):
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=np.random.default_rng(0))
    emotion = full_catalog.label("afraid")
    item = build_gen_input(vocab, CFG, emotion, "kw2 mark2 sample", "kw3 mark3")
    distractor = tuple(int(i) for i in vocab.encode("kw9 mark9")) + (EOS_ID,)
    total, l_lm, l_nsp, l_esg = gen_losses(gen, item, distractor, emotion)
    assert abs(total.item() - (l_lm.item() + l_nsp.item() + l_esg.item())) <= 1e-12


def test_untrained_nsp_is_coin_flip(full_catalog, setup):
    # zero weights: sigmoid(0) = 0.5 on both branches -> BCE = ln 2
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=None)
    emotion = full_catalog.label("afraid")
    item = build_gen_input(vocab, CFG, emotion, "kw2 mark2", "kw3 mark3")
    distractor = tuple(int(i) for i in vocab.encode("kw9 mark9")) + (EOS_ID,)
    _, _, l_nsp, l_esg = gen_losses(gen, item, distractor, emotion)
    assert abs(l_nsp.item() - math.log(2)) <= 1e-12
    # zero-init emotion head is uniform over the catalog
    assert abs(l_esg.item() - math.log(29)) <= 1e-9


def test_distractor_must_differ(full_catalog, setup):
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=None)
    emotion = full_catalog.label("afraid")
    item = build_gen_input(vocab, CFG, emotion, "kw2", "kw3")
    with pytest.raises(ValueError):
        gen_losses(gen, item, item.reply_ids, emotion)


def test_gen_loss_gradcheck(full_catalog, setup):
    vocab = setup
    small = GenConfig(window=2, embed_dim=4, lm_hidden=6, max_len=64)
    gen = ToyGenerator(full_catalog, vocab, small, rng=np.random.default_rng(1))
    emotion = full_catalog.label("joyful")
    item = build_gen_input(vocab, small, emotion, "kw0", "kw1 kw2")
    distractor = tuple(int(i) for i in vocab.encode("kw5")) + (EOS_ID,)
    fn = lambda: gen_losses(gen, item, distractor, emotion)[0]
    # embedding participates in all three heads; spot-check it plus one head
    err = nn.grad_check(fn, [gen.embedding, *gen.nsp_head.parameters()], epsilon=1e-6)
    assert err <= 1e-5


def test_training_memorizes_single_reply(full_catalog, setup):
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=np.random.default_rng(2))
    emotion = full_catalog.label("joyful")
    item = build_gen_input(vocab, CFG, emotion, "kw0 mark0", "kw1 mark1 today")
    distractor = tuple(int(i) for i in vocab.encode("kw9 mark9")) + (EOS_ID,)
    opt = nn.Optimizer(gen.parameters(), nn.OptimConfig(learning_rate=5e-3))
    first = gen_train_step(gen, item, distractor, emotion, opt)[0]
    for _ in range(120):
        last = gen_train_step(gen, item, distractor, emotion, opt)[0]
    assert last < first * 0.3
    out = generate(gen, "kw0 mark0", emotion, max_len=10)
    assert out.startswith("kw1")


def test_generate_stops_at_end_token(full_catalog, setup):
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=np.random.default_rng(3))
    # force the end token to always win
    gen.lm_head.layers[-1].bias.data[EOS_ID] = 50.0
    out = generate(gen, "kw0", full_catalog.label("joyful"), max_len=10)
    assert out == ""


def test_generate_respects_max_len(full_catalog, setup):
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=np.random.default_rng(4))
    gen.lm_head.layers[-1].bias.data[EOS_ID] = -50.0  # never stop early
    out = generate(gen, "kw0", full_catalog.label("joyful"), max_len=7)
    assert len(out.split()) <= 7


def test_generate_mode_validation(full_catalog, setup):
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=None)
    lab = full_catalog.label("joyful")
    with pytest.raises(ValueError):
        generate(gen, "kw0", lab, mode="nucleus")
    with pytest.raises(ValueError):
        generate(gen, "kw0", lab, mode="topk")  # rng required
    with pytest.raises(ValueError):
        generate(gen, "kw0", lab, max_len=0)


def test_topk_sampling_is_reproducible(full_catalog, setup):
    vocab = setup
    gen = ToyGenerator(full_catalog, vocab, CFG, rng=np.random.default_rng(5))
    lab = full_catalog.label("joyful")
    a = generate(gen, "kw0 mark0", lab, mode="topk", k=4, rng=np.random.default_rng(10))
    b = generate(gen, "kw0 mark0", lab, mode="topk", k=4, rng=np.random.default_rng(10))
    assert a == b
