"""Workdir stages: artifact wiring, loaders, stage errors, evaluation."""

import json
import math

import pytest

from cheerbot import nn
from cheerbot.corpus import build_vocab, split_records, tokenize
from cheerbot.detector import detect
from cheerbot.generator import GenConfig
from cheerbot.pipeline import (
    StageError,
    curve_path,
    checkpoint_path,
    evaluate,
    ingest,
    load_chat_components,
    load_detector,
    load_encoder,
    load_generator,
    load_predictor,
    load_workdir_catalog,
    load_workdir_records,
    load_workdir_vocab,
    make_gen_item,
    pool_cache_path,
    run_train_rl,
    vocab_path,
)
from cheerbot.synthetic import emotion_corpus, vocab_for_records


@pytest.fixture()
def ingested_workdir(tmp_path, toy_csv):
    ingest(tmp_path, toy_csv)
    return tmp_path


def test_loaders_rebuild_identical_models(trained_workdir):
    catalog = load_workdir_catalog(trained_workdir)
    vocab = load_workdir_vocab(trained_workdir, catalog)
    first = load_detector(trained_workdir, catalog, vocab)
    second = load_detector(trained_workdir, catalog, vocab)
    assert nn.params_hash(first.parameters()) == nn.params_hash(second.parameters())
    # the loaded model is usable, not just shaped right
    out = detect(first, "kw3 mark3 sample today")
    assert out.dominant.name in catalog.names
    assert -1.0 <= out.va.valence <= 1.0

    enc = load_encoder(trained_workdir, vocab)
    assert isinstance(enc.config.encoder_dims, tuple)
    gen = load_generator(trained_workdir, catalog, vocab)
    assert gen.vocab.size == vocab.size
    pred = load_predictor(trained_workdir, catalog, vocab)
    assert pred.feature_dim > len(catalog)


def test_catalog_in_workdir_carries_bootstrapped_va(trained_workdir):
    catalog = load_workdir_catalog(trained_workdir)
    missing = [lab.name for lab in catalog if not catalog.has_va(lab)]
    assert missing == []


def test_stage_errors_point_at_missing_stage(tmp_path):
    with pytest.raises(StageError) as exc:
        load_workdir_catalog(tmp_path)
    assert exc.value.missing_stage == "ingest"
    assert "run ingest first" in str(exc.value)


def test_loaders_demand_their_training_stage(ingested_workdir):
    catalog = load_workdir_catalog(ingested_workdir)
    vocab = load_workdir_vocab(ingested_workdir, catalog)
    cases = [
        (lambda: load_detector(ingested_workdir, catalog, vocab), "train-detector"),
        (lambda: load_predictor(ingested_workdir, catalog, vocab), "train-predictor"),
        (lambda: load_encoder(ingested_workdir, vocab), "train-retrieval"),
        (lambda: load_generator(ingested_workdir, catalog, vocab), "train-gen"),
    ]
    for loader, stage in cases:
        with pytest.raises(StageError) as exc:
            loader()
        assert exc.value.missing_stage == stage
        assert f"run {stage} first" in str(exc.value)


def test_evaluate_reward_requires_trained_policy(tmp_path):
    with pytest.raises(StageError) as exc:
        evaluate(tmp_path, "reward")
    assert exc.value.missing_stage == "train-rl"


def test_evaluate_rejects_unknown_metric(trained_workdir):
    with pytest.raises(ValueError, match="unknown metric"):
        evaluate(trained_workdir, "rouge")


def test_vocab_comes_from_train_split_only(trained_workdir):
    catalog = load_workdir_catalog(trained_workdir)
    records = load_workdir_records(trained_workdir, catalog)
    stored = json.loads((vocab_path(trained_workdir)).read_text())["tokens"]
    rebuilt = build_vocab(split_records(records)["train"], catalog)
    assert stored == rebuilt.tokens()
    # tokens seen only outside the train split must stay out of the vocab
    train_tokens = {t for r in split_records(records)["train"] for t in tokenize(r.text)}
    held_out = {
        t
        for split in ("valid", "test")
        for r in split_records(records)[split]
        for t in tokenize(r.text)
    } - train_tokens
    vocab = load_workdir_vocab(trained_workdir, catalog)
    for tok in held_out:
        assert tok not in vocab.tokens()


def test_ingest_reports_record_count(tmp_path, toy_csv):
    n = ingest(tmp_path, toy_csv)
    catalog = load_workdir_catalog(tmp_path)
    records = load_workdir_records(tmp_path, catalog)
    assert n == len(records) > 0


# ---------------------------------------------------------------------------
# generator item assembly


def _gen_vocab(full_catalog):
    records = emotion_corpus(full_catalog, per_label=2)
    return vocab_for_records(records, full_catalog)


def test_make_gen_item_truncates_history_from_front(full_catalog):
    vocab = _gen_vocab(full_catalog)
    emotion = full_catalog.label("joyful")
    cfg = GenConfig(window=3, embed_dim=8, lm_hidden=8, max_len=12, persona="kw0")
    long_history = "kw1 kw2 kw3 kw4 kw5 kw6 kw7 kw8 kw9 kw10"
    item = make_gen_item(vocab, cfg, emotion, long_history, "kw11 today")
    assert item is not None
    full = item.full_ids()
    assert len(full) <= cfg.max_len
    # the kept history is the tail of the full encoding
    all_hist = vocab.encode(long_history)
    assert list(item.history_ids) == [int(i) for i in all_hist[-len(item.history_ids):]]


def test_make_gen_item_refuses_unfittable_or_empty_reply(full_catalog):
    vocab = _gen_vocab(full_catalog)
    emotion = full_catalog.label("joyful")
    tight = GenConfig(window=3, embed_dim=8, lm_hidden=8, max_len=4, persona="kw0")
    assert make_gen_item(vocab, tight, emotion, "kw1", "kw2 kw3 kw4 kw5 kw6") is None
    cfg = GenConfig(window=3, embed_dim=8, lm_hidden=8, max_len=24)
    assert make_gen_item(vocab, cfg, emotion, "kw1", "   ") is None


# ---------------------------------------------------------------------------
# chat components and the pool cache


def test_chat_components_load_with_cache(trained_workdir):
    comps = load_chat_components(trained_workdir)
    assert pool_cache_path(trained_workdir).exists()
    assert len(comps.listener_pool) > 0
    assert all(e.embedding is not None for e in comps.listener_pool.entries)


def test_chat_components_survive_stale_cache(tmp_path, trained_workdir):
    """A cache written for different encoder weights must be rebuilt, not
    trusted."""
    import shutil

    work = tmp_path / "copy"
    shutil.copytree(trained_workdir, work)
    cache = pool_cache_path(work)
    payload = json.loads(cache.read_text())
    payload["encoder_checkpoint_hash"] = "0" * 64
    cache.write_text(json.dumps(payload))
    comps = load_chat_components(work)
    assert all(e.embedding is not None for e in comps.listener_pool.entries)


def test_chat_components_without_cache(tmp_path, trained_workdir):
    import shutil

    work = tmp_path / "copy"
    shutil.copytree(trained_workdir, work)
    pool_cache_path(work).unlink()
    comps = load_chat_components(work)
    assert all(e.embedding is not None for e in comps.listener_pool.entries)


# ---------------------------------------------------------------------------
# rl stage


def test_oracle_rl_runs_in_empty_workdir(tmp_path):
    work = tmp_path / "fresh"
    result = run_train_rl(
        work, seed=3, algorithm="dqn", n_episodes=10, lr=5e-3, target_sync_freq=50
    )
    assert len(result.episode_rewards) == 10
    assert curve_path(work).exists()
    assert checkpoint_path(work, "qnet").exists()
    assert checkpoint_path(work, "rl_policy").exists()


def test_oracle_rl_same_seed_same_curve_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for work in (a, b):
        run_train_rl(work, seed=11, algorithm="dqn", n_episodes=15, lr=5e-3,
                     target_sync_freq=50)
    assert curve_path(a).read_bytes() == curve_path(b).read_bytes()
    assert checkpoint_path(a, "qnet").read_bytes() == checkpoint_path(b, "qnet").read_bytes()


def test_run_train_rl_rejects_unknown_backend(tmp_path):
    with pytest.raises(ValueError, match="unknown RL backend"):
        run_train_rl(tmp_path, seed=0, backend="dream")


# ---------------------------------------------------------------------------
# evaluation end to end


def test_evaluate_each_metric_on_trained_workdir(trained_workdir):
    ppl = evaluate(trained_workdir, "ppl")
    assert len(ppl) == 1 and ppl[0].value > 1.0 and math.isfinite(ppl[0].value)
    bleu = evaluate(trained_workdir, "bleu")
    assert len(bleu) == 1 and 0.0 <= bleu[0].value <= 1.0
    prec = evaluate(trained_workdir, "p@1,100")
    assert len(prec) == 1 and 0.0 <= prec[0].value <= 1.0
    reward = evaluate(trained_workdir, "reward", episodes=30)
    assert [r.metric for r in reward] == ["mean_reward_1_turn", "mean_reward_3_turn"]
    for rep in reward:
        assert math.isfinite(rep.value)
    # reports carry enough digest to pin the run
    assert "generator" in ppl[0].digest
    assert "encoder" in prec[0].digest


def test_evaluate_is_deterministic(trained_workdir):
    a = evaluate(trained_workdir, "ppl")[0].value
    b = evaluate(trained_workdir, "ppl")[0].value
    assert a == b
