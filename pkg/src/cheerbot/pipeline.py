"""End-to-end stages over a working directory: ingest, the two-phase
detector training with the VA bootstrap, predictor/retrieval/generator
training, RL, and evaluation.  The CLI is a thin wrapper over these.

Artifact layout under the workdir:
    records.jsonl   canonicalized conversation records
    catalog.json    emotion catalog (completed by bootstrap-va)
    vocab.json      token list (ids reassigned deterministically on load)
    checkpoints/    one JSON per component + bundle manifest
    pool_cache.json cached candidate embeddings
    rl_curve.csv    reward curve of the last train-rl run
    reports/        metric reports as JSON
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import nn
from .catalog import EmotionCatalog, load_catalog, load_default_catalog, save_catalog
from .checkpoint import CheckpointError, load_checkpoint, read_checkpoint, save_checkpoint
from .corpus import (
    EOS_ID,
    CandidatePool,
    UtteranceRecord,
    Vocab,
    build_pools,
    build_vocab,
    conversations,
    make_context,
    parse_ed_csv,
    records_from_jsonl,
    records_to_jsonl,
    split_records,
)
from .detector import DetectorConfig, DetectorModel, bootstrap_va_table, detect, detector_train_step
from .generator import GenConfig, GenInput, ToyGenerator, gen_train_step, generate
from .metrics import MetricReport, avg_bleu, p_at_1_100, perplexity, reward_report
from .predictor import PredictorConfig, PredictorModel, predictor_train_step
from .retrieval import (
    BiEncoder,
    RetrievalConfig,
    encode_pool,
    load_pool_cache,
    retrieval_train_step,
    save_pool_cache,
)
from .rl import (
    ArgmaxPolicy,
    CorpusEnv,
    EpsilonGreedyQPolicy,
    QNetwork,
    RetrievalResponder,
    RlConfig,
    RlResult,
    SoftmaxPolicy,
    save_curve,
    train_rl,
)
from .corpus import tokenize
from .speaker_sim import RetrievalSpeaker
from .synthetic import make_synthetic_rl_setup


class StageError(RuntimeError):
    """A pipeline stage is missing an artifact another stage produces."""

    def __init__(self, message: str, missing_stage: str | None = None):
        super().__init__(message)
        self.missing_stage = missing_stage


# ---------------------------------------------------------------------------
# workdir paths


def records_path(workdir: Path) -> Path:
    return Path(workdir) / "records.jsonl"


def catalog_path(workdir: Path) -> Path:
    return Path(workdir) / "catalog.json"


def vocab_path(workdir: Path) -> Path:
    return Path(workdir) / "vocab.json"


def checkpoint_dir(workdir: Path) -> Path:
    return Path(workdir) / "checkpoints"


def checkpoint_path(workdir: Path, component: str) -> Path:
    return checkpoint_dir(workdir) / f"{component}.json"


def pool_cache_path(workdir: Path) -> Path:
    return Path(workdir) / "pool_cache.json"


def curve_path(workdir: Path) -> Path:
    return Path(workdir) / "rl_curve.csv"


def report_path(workdir: Path, metric: str) -> Path:
    safe = metric.replace("@", "_at_").replace(",", "_").replace("/", "_")
    return Path(workdir) / "reports" / f"{safe}.json"


# ---------------------------------------------------------------------------
# shared loading helpers


def load_workdir_catalog(workdir: Path) -> EmotionCatalog:
    path = catalog_path(workdir)
    if not path.exists():
        raise StageError(f"no catalog at {path}; run ingest first", missing_stage="ingest")
    return load_catalog(path)


def load_workdir_records(workdir: Path, catalog: EmotionCatalog) -> list[UtteranceRecord]:
    path = records_path(workdir)
    if not path.exists():
        raise StageError(f"no records at {path}; run ingest first", missing_stage="ingest")
    return records_from_jsonl(path, catalog)


def load_workdir_vocab(workdir: Path, catalog: EmotionCatalog) -> Vocab:
    path = vocab_path(workdir)
    if not path.exists():
        raise StageError(f"no vocab at {path}; run ingest first", missing_stage="ingest")
    with open(path, encoding="utf-8") as fh:
        tokens = json.load(fh)["tokens"]
    return Vocab(catalog, tokens)


def require_checkpoint(workdir: Path, component: str, stage: str) -> Path:
    path = checkpoint_path(workdir, component)
    if not path.exists():
        raise StageError(
            f"missing {component} checkpoint at {path}; run {stage} first",
            missing_stage=stage,
        )
    return path


def _require_complete_catalog(catalog: EmotionCatalog) -> None:
    missing = [lab.name for lab in catalog if not catalog.has_va(lab)]
    if missing:
        raise StageError(
            f"catalog lacks VA entries for {missing}; run bootstrap-va first",
            missing_stage="bootstrap-va",
        )


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for i in range(0, n, batch_size):
        chunk = order[i : i + batch_size]
        if len(chunk) > 0:
            yield chunk


# ---------------------------------------------------------------------------
# model reconstruction from checkpoints


def _tupled(config_dict: dict) -> dict:
    return {
        k: tuple(v) if isinstance(v, list) else v for k, v in config_dict.items()
    }


def load_detector(workdir: Path, catalog: EmotionCatalog, vocab: Vocab) -> DetectorModel:
    path = require_checkpoint(workdir, "detector", "train-detector")
    _, _, meta = read_checkpoint(path, expected_component="detector")
    model = DetectorModel(catalog, vocab, DetectorConfig(**_tupled(meta["config"])))
    load_checkpoint(model.parameters(), path, expected_component="detector")
    return model


def load_predictor(workdir: Path, catalog: EmotionCatalog, vocab: Vocab) -> PredictorModel:
    path = require_checkpoint(workdir, "predictor", "train-predictor")
    _, _, meta = read_checkpoint(path, expected_component="predictor")
    model = PredictorModel(catalog, vocab, PredictorConfig(**_tupled(meta["config"])))
    load_checkpoint(model.parameters(), path, expected_component="predictor")
    return model


def load_encoder(workdir: Path, vocab: Vocab) -> BiEncoder:
    path = require_checkpoint(workdir, "retrieval", "train-retrieval")
    _, _, meta = read_checkpoint(path, expected_component="retrieval")
    enc = BiEncoder(vocab, RetrievalConfig(**_tupled(meta["config"])))
    load_checkpoint(enc.parameters(), path, expected_component="retrieval")
    return enc


def load_generator(workdir: Path, catalog: EmotionCatalog, vocab: Vocab) -> ToyGenerator:
    path = require_checkpoint(workdir, "generator", "train-gen")
    _, _, meta = read_checkpoint(path, expected_component="generator")
    gen = ToyGenerator(catalog, vocab, GenConfig(**_tupled(meta["config"])))
    load_checkpoint(gen.parameters(), path, expected_component="generator")
    return gen


# ---------------------------------------------------------------------------
# stages


def ingest(workdir: Path, csv_path: str | Path, catalog: EmotionCatalog | None = None) -> int:
    """Parse the CSV, persist records + catalog + vocab; returns the record
    count.  The vocab is built from the train split only."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    catalog = catalog or load_default_catalog()
    records = parse_ed_csv(csv_path, catalog)
    records_to_jsonl(records, records_path(workdir))
    save_catalog(catalog, catalog_path(workdir))
    vocab = build_vocab(split_records(records)["train"], catalog)
    with open(vocab_path(workdir), "w", encoding="utf-8") as fh:
        json.dump({"tokens": vocab.tokens()}, fh)
    return len(records)


def fit_detector(
    model: DetectorModel,
    texts: list[str],
    golds: list,
    rng: np.random.Generator,
    epochs: int,
    batch_size: int = 32,
    lr: float = 1e-2,
    fine_tune_epochs: int = 0,
) -> None:
    """Shuffled mini-batch training, optionally followed by a phase at a
    tenth of the rate so the VA head settles instead of oscillating."""
    for n_epochs, rate in ((epochs, lr), (fine_tune_epochs, lr / 10.0)):
        if n_epochs <= 0:
            continue
        optimizer = nn.Optimizer(
            model.parameters(), nn.OptimConfig(algorithm="adam", learning_rate=rate)
        )
        for _ in range(n_epochs):
            for idx in _batches(len(texts), batch_size, rng):
                detector_train_step(
                    model, [texts[i] for i in idx], [golds[i] for i in idx], optimizer
                )


def bootstrap_va(
    workdir: Path,
    seed: int,
    epochs: int = 800,
    batch_size: int = 32,
    config: DetectorConfig | None = None,
    fine_tune_epochs: int = 300,
) -> EmotionCatalog:
    """Phase 1 of the detector: train on seed-labeled utterances only, then
    complete the VA table from the VA head's predictions and write the
    catalog back."""
    workdir = Path(workdir)
    catalog = load_workdir_catalog(workdir)
    records = load_workdir_records(workdir, catalog)
    vocab = load_workdir_vocab(workdir, catalog)
    if all(catalog.has_va(lab) for lab in catalog):
        return catalog
    config = config or DetectorConfig()
    rng = np.random.default_rng(seed)
    model = DetectorModel(catalog, vocab, config, rng=rng)
    train = split_records(records)["train"]
    seed_items = [r for r in train if catalog.has_va(r.situation_emotion)]
    if not seed_items:
        raise StageError("no seed-labeled utterances to train the first-phase detector on")
    fit_detector(
        model,
        [r.text for r in seed_items],
        [r.situation_emotion for r in seed_items],
        rng,
        epochs,
        batch_size,
        fine_tune_epochs=fine_tune_epochs,
    )
    completed = bootstrap_va_table(model, catalog, train)
    save_catalog(completed, catalog_path(workdir))
    return completed


def train_detector(
    workdir: Path,
    seed: int,
    epochs: int = 60,
    batch_size: int = 32,
    config: DetectorConfig | None = None,
) -> Path:
    """Phase 2: from-scratch detector over the full label set; requires the
    completed VA table."""
    workdir = Path(workdir)
    catalog = load_workdir_catalog(workdir)
    _require_complete_catalog(catalog)
    records = load_workdir_records(workdir, catalog)
    vocab = load_workdir_vocab(workdir, catalog)
    config = config or DetectorConfig()
    rng = np.random.default_rng(seed)
    model = DetectorModel(catalog, vocab, config, rng=rng)
    train = split_records(records)["train"]
    if not train:
        raise StageError("train split is empty")
    fit_detector(
        model,
        [r.text for r in train],
        [r.situation_emotion for r in train],
        rng,
        epochs,
        batch_size,
    )
    ck_dir = checkpoint_dir(workdir)
    ck_dir.mkdir(parents=True, exist_ok=True)
    path = checkpoint_path(workdir, "detector")
    save_checkpoint(
        model.parameters(),
        path,
        component="detector",
        meta={"config": asdict(config), "seed": seed},
    )
    return path


def _next_emotion_items(
    detector: DetectorModel, records: list[UtteranceRecord]
) -> list[tuple[str, object, object]]:
    """(text, detected current emotion, detected next-utterance emotion) for
    every adjacent pair within a conversation."""
    items = []
    for conv in conversations(records).values():
        detected = [detect(detector, r.text).dominant for r in conv]
        for t in range(len(conv) - 1):
            items.append((conv[t].text, detected[t], detected[t + 1]))
    return items


def train_predictor(
    workdir: Path,
    seed: int,
    epochs: int = 40,
    batch_size: int = 32,
    config: PredictorConfig | None = None,
) -> Path:
    workdir = Path(workdir)
    catalog = load_workdir_catalog(workdir)
    records = load_workdir_records(workdir, catalog)
    vocab = load_workdir_vocab(workdir, catalog)
    detector = load_detector(workdir, catalog, vocab)
    config = config or PredictorConfig()
    rng = np.random.default_rng(seed)
    model = PredictorModel(catalog, vocab, config, rng=rng)
    items = _next_emotion_items(detector, split_records(records)["train"])
    if not items:
        raise StageError("no adjacent-turn pairs to train the predictor on")
    optimizer = nn.Optimizer(
        model.parameters(), nn.OptimConfig(algorithm="adam", learning_rate=1e-2)
    )
    for _ in range(epochs):
        for idx in _batches(len(items), batch_size, rng):
            chunk = [items[i] for i in idx]
            predictor_train_step(
                model,
                [c[0] for c in chunk],
                [c[1] for c in chunk],
                [c[2] for c in chunk],
                optimizer,
                rng,
            )
    ck_dir = checkpoint_dir(workdir)
    ck_dir.mkdir(parents=True, exist_ok=True)
    path = checkpoint_path(workdir, "predictor")
    save_checkpoint(
        model.parameters(),
        path,
        component="predictor",
        meta={"config": asdict(config), "seed": seed},
    )
    return path


def _reply_pairs(records: list[UtteranceRecord], history_len: int = 4) -> list[tuple[str, str, object]]:
    """(context text, listener reply, situation emotion) per listener turn."""
    pairs = []
    for conv in conversations(records).values():
        for t, rec in enumerate(conv):
            if rec.role != "listener" or t == 0:
                continue
            ctx = make_context(conv, t - 1, max_len=history_len)
            pairs.append((ctx.joined(), rec.text, rec.situation_emotion))
    return pairs


def train_retrieval(
    workdir: Path,
    seed: int,
    epochs: int = 60,
    batch_size: int = 16,
    config: RetrievalConfig | None = None,
) -> Path:
    workdir = Path(workdir)
    catalog = load_workdir_catalog(workdir)
    records = load_workdir_records(workdir, catalog)
    vocab = load_workdir_vocab(workdir, catalog)
    config = config or RetrievalConfig()
    rng = np.random.default_rng(seed)
    enc = BiEncoder(vocab, config, rng=rng)
    pairs = _reply_pairs(split_records(records)["train"])
    if len(pairs) < 2:
        raise StageError("need at least 2 context-reply pairs to train retrieval")
    optimizer = nn.Optimizer(
        enc.parameters(), nn.OptimConfig(algorithm="adam", learning_rate=1e-2)
    )
    contexts = [p[0] for p in pairs]
    replies = [p[1] for p in pairs]
    for _ in range(epochs):
        for idx in _batches(len(pairs), batch_size, rng):
            if len(idx) < 2:
                continue
            retrieval_train_step(
                enc, [contexts[i] for i in idx], [replies[i] for i in idx], optimizer
            )
    ck_dir = checkpoint_dir(workdir)
    ck_dir.mkdir(parents=True, exist_ok=True)
    path = checkpoint_path(workdir, "retrieval")
    save_checkpoint(
        enc.parameters(),
        path,
        component="retrieval",
        meta={"config": asdict(config), "seed": seed},
    )
    listener_pool, _ = build_pools(split_records(records)["train"])
    if len(listener_pool) > 0:
        encode_pool(enc, listener_pool)
        save_pool_cache(pool_cache_path(workdir), listener_pool, enc)
    return path


def make_gen_item(
    vocab: Vocab, config: GenConfig, emotion, history_text: str, reply_text: str
) -> GenInput | None:
    """GenInput with the history truncated from the front to fit max_len;
    None when even an empty history cannot fit the reply."""
    persona_ids = tuple(int(i) for i in vocab.encode(config.persona))
    reply_ids = [int(i) for i in vocab.encode(reply_text)]
    if not reply_ids:
        return None
    reply_ids.append(EOS_ID)
    budget = config.max_len - len(persona_ids) - 1 - len(reply_ids)
    if budget < 0:
        return None
    history_ids = [int(i) for i in vocab.encode(history_text)][-budget:] if budget else []
    return GenInput(
        persona_ids=persona_ids,
        emotion_token_id=vocab.emotion_id(emotion),
        history_ids=tuple(history_ids),
        reply_ids=tuple(reply_ids),
    )


def train_gen(
    workdir: Path,
    seed: int,
    epochs: int = 30,
    config: GenConfig | None = None,
) -> Path:
    workdir = Path(workdir)
    catalog = load_workdir_catalog(workdir)
    records = load_workdir_records(workdir, catalog)
    vocab = load_workdir_vocab(workdir, catalog)
    config = config or GenConfig()
    rng = np.random.default_rng(seed)
    gen = ToyGenerator(catalog, vocab, config, rng=rng)
    pairs = _reply_pairs(split_records(records)["train"])
    items = []
    for ctx, reply, emotion in pairs:
        item = make_gen_item(vocab, config, emotion, ctx, reply)
        if item is not None:
            items.append((item, emotion))
    if len(items) < 2:
        raise StageError("need at least 2 generator items (for distractors)")
    optimizer = nn.Optimizer(
        gen.parameters(), nn.OptimConfig(algorithm="adam", learning_rate=1e-2)
    )
    for _ in range(epochs):
        for i in rng.permutation(len(items)):
            item, emotion = items[i]
            j = int(rng.integers(len(items)))
            distractor = items[j][0].reply_ids
            if distractor == item.reply_ids:
                continue
            gen_train_step(gen, item, distractor, emotion, optimizer)
    ck_dir = checkpoint_dir(workdir)
    ck_dir.mkdir(parents=True, exist_ok=True)
    path = checkpoint_path(workdir, "generator")
    save_checkpoint(
        gen.parameters(),
        path,
        component="generator",
        meta={"config": asdict(config), "seed": seed},
    )
    return path


def run_train_rl(
    workdir: Path,
    seed: int,
    algorithm: str = "dqn",
    backend: str = "oracle",
    n_episodes: int | None = None,
    lr: float | None = None,
    target_sync_freq: int | None = None,
) -> RlResult:
    """Train the next-emotion policy; oracle backend is self-contained,
    corpus backend needs detector + predictor + retrieval checkpoints."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    kwargs: dict = {"algorithm": algorithm, "seed": seed}
    if n_episodes is not None:
        kwargs["n_episodes"] = n_episodes
    if lr is not None:
        kwargs["lr"] = lr
    if target_sync_freq is not None:
        kwargs["target_sync_freq"] = target_sync_freq
    config = RlConfig(**kwargs)

    if backend == "oracle":
        setup = make_synthetic_rl_setup(seed)
        result = train_rl(config, setup.predictor, setup.responder, setup.env)
        policy_model = setup.predictor
        frozen_hashes = {}
    elif backend == "corpus":
        catalog = load_workdir_catalog(workdir)
        records = load_workdir_records(workdir, catalog)
        vocab = load_workdir_vocab(workdir, catalog)
        detector = load_detector(workdir, catalog, vocab)
        predictor = load_predictor(workdir, catalog, vocab)
        enc = load_encoder(workdir, vocab)
        train = split_records(records)["train"]
        listener_pool, speaker_pool = build_pools(train)
        if len(listener_pool) == 0 or len(speaker_pool) == 0:
            raise StageError("corpus backend needs nonempty listener and speaker pools")
        encode_pool(enc, listener_pool)
        encode_pool(enc, speaker_pool)
        speaker = RetrievalSpeaker(enc, speaker_pool)
        situation = train[0].situation_prompt
        env = CorpusEnv(speaker, detector, situation)
        responder = RetrievalResponder(enc, listener_pool)
        result = train_rl(
            config,
            predictor,
            responder,
            env,
            frozen_components=[detector.parameters(), enc.parameters()],
        )
        policy_model = predictor
        frozen_hashes = {
            "detector": nn.params_hash(detector.parameters()),
            "retrieval": nn.params_hash(enc.parameters()),
        }
    else:
        raise ValueError(f"unknown RL backend {backend!r}")

    save_curve(result, curve_path(workdir))
    ck_dir = checkpoint_dir(workdir)
    ck_dir.mkdir(parents=True, exist_ok=True)
    if result.qnet is not None:
        save_checkpoint(
            result.qnet.parameters(),
            checkpoint_path(workdir, "qnet"),
            component="qnet",
            meta={
                "config": json.loads(config.to_json()),
                "feature_dim": result.qnet.feature_dim,
                "n_actions": result.qnet.n_actions,
                "hidden": result.qnet.hidden,
                "frozen_hashes": frozen_hashes,
            },
        )
    save_checkpoint(
        policy_model.parameters(),
        checkpoint_path(workdir, "rl_policy"),
        component="rl_policy",
        meta={"config": json.loads(config.to_json()), "frozen_hashes": frozen_hashes},
    )
    return result


def evaluate(workdir: Path, metric: str, seed: int = 0, episodes: int = 100) -> list[MetricReport]:
    """Compute one metric over the test split (or the synthetic
    environment for rewards) and persist the report."""
    workdir = Path(workdir)
    reports: list[MetricReport]

    if metric == "p@1,100":
        catalog = load_workdir_catalog(workdir)
        records = load_workdir_records(workdir, catalog)
        vocab = load_workdir_vocab(workdir, catalog)
        enc = load_encoder(workdir, vocab)
        splits = split_records(records)
        pairs = _reply_pairs(splits["test"])
        items = [(ctx, reply) for ctx, reply, _ in pairs]
        extras = [reply for _, reply, _ in _reply_pairs(splits["train"] + splits["valid"])]
        value = p_at_1_100(enc, items, seed=seed, extra_candidates=extras)
        reports = [
            MetricReport(
                metric=metric,
                value=value,
                n_items=len(items),
                digest={"seed": seed, "split": "test", "encoder": nn.params_hash(enc.parameters())},
            )
        ]
    elif metric == "bleu":
        catalog = load_workdir_catalog(workdir)
        records = load_workdir_records(workdir, catalog)
        vocab = load_workdir_vocab(workdir, catalog)
        gen = load_generator(workdir, catalog, vocab)
        pairs = _reply_pairs(split_records(records)["test"])
        if not pairs:
            raise StageError("test split has no context-reply pairs")
        scored = []
        for ctx, reply, emotion in pairs:
            hyp = generate(gen, ctx, emotion, max_len=24, mode="greedy")
            scored.append((tokenize(hyp), tokenize(reply)))
        value = avg_bleu(scored)
        reports = [
            MetricReport(
                metric=metric,
                value=value,
                n_items=len(scored),
                digest={"split": "test", "generator": nn.params_hash(gen.parameters())},
            )
        ]
    elif metric == "ppl":
        catalog = load_workdir_catalog(workdir)
        records = load_workdir_records(workdir, catalog)
        vocab = load_workdir_vocab(workdir, catalog)
        gen = load_generator(workdir, catalog, vocab)
        pairs = _reply_pairs(split_records(records)["test"])
        items = []
        for ctx, reply, emotion in pairs:
            item = make_gen_item(vocab, gen.config, emotion, ctx, reply)
            if item is not None:
                items.append(item)
        value = perplexity(gen, items)
        reports = [
            MetricReport(
                metric=metric,
                value=value,
                n_items=len(items),
                digest={"split": "test", "generator": nn.params_hash(gen.parameters())},
            )
        ]
    elif metric == "reward":
        qnet_path = checkpoint_path(workdir, "qnet")
        policy_path = checkpoint_path(workdir, "rl_policy")
        if not qnet_path.exists() and not policy_path.exists():
            raise StageError(
                "no trained policy checkpoint; run train-rl first", missing_stage="train-rl"
            )
        setup = make_synthetic_rl_setup(seed)
        if qnet_path.exists():
            _, _, meta = read_checkpoint(qnet_path, expected_component="qnet")
            qnet = QNetwork(meta["feature_dim"], meta["n_actions"], meta["hidden"])
            load_checkpoint(qnet.parameters(), qnet_path, expected_component="qnet")
            policy = EpsilonGreedyQPolicy(qnet, epsilon=0.0)
        else:
            load_checkpoint(
                setup.predictor.parameters(), policy_path, expected_component="rl_policy"
            )
            policy = SoftmaxPolicy(setup.predictor)
        reports = reward_report(
            policy,
            setup.predictor,
            setup.responder,
            setup.env,
            turn_counts=(1, 3),
            episodes=episodes,
            seed=seed,
        )
    else:
        raise ValueError(f"unknown metric {metric!r}")

    report_file = report_path(workdir, metric)
    report_file.parent.mkdir(parents=True, exist_ok=True)
    with open(report_file, "w", encoding="utf-8") as fh:
        fh.write("[" + ",".join(r.to_json() for r in reports) + "]")
    return reports


# ---------------------------------------------------------------------------
# chat component bundle


@dataclass
class ChatComponents:
    catalog: EmotionCatalog
    vocab: Vocab
    detector: DetectorModel
    predictor: PredictorModel
    encoder: BiEncoder
    listener_pool: CandidatePool


def load_chat_components(workdir: Path) -> ChatComponents:
    workdir = Path(workdir)
    catalog = load_workdir_catalog(workdir)
    records = load_workdir_records(workdir, catalog)
    vocab = load_workdir_vocab(workdir, catalog)
    detector = load_detector(workdir, catalog, vocab)
    predictor = load_predictor(workdir, catalog, vocab)
    enc = load_encoder(workdir, vocab)
    listener_pool, _ = build_pools(split_records(records)["train"])
    if len(listener_pool) == 0:
        raise StageError("no listener utterances to retrieve replies from")
    cache = pool_cache_path(workdir)
    if cache.exists():
        try:
            load_pool_cache(cache, listener_pool, enc)
        except ValueError:
            encode_pool(enc, listener_pool)
    else:
        encode_pool(enc, listener_pool)
    return ChatComponents(
        catalog=catalog,
        vocab=vocab,
        detector=detector,
        predictor=predictor,
        encoder=enc,
        listener_pool=listener_pool,
    )
