"""Conversation ingestion: CSV parsing, candidate pools, contexts, vocab.

The input format is the EmpatheticDialogues-style CSV (columns conv_id,
utterance_idx, context, prompt, utterance; literal commas escaped as
`_comma_`).  Turn parity follows the dataset convention: even normalized
turn index = speaker, odd = listener.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import CatalogError, EmotionCatalog, EmotionLabel

ROLE_SPEAKER = "speaker"
ROLE_LISTENER = "listener"

DEFAULT_HISTORY_LEN = 4

PAD_ID = 0
UNK_ID = 1
EOS_ID = 2
EOS_TOKEN = "</s>"

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*|[^a-z0-9\s]")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class UtteranceRecord:
    conv_id: str
    turn_idx: int
    role: str
    text: str
    situation_emotion: EmotionLabel
    situation_prompt: str


@dataclass(frozen=True)
class DialogueContext:
    """At most `max_len` chronological turns ending at the current one."""

    history: tuple[UtteranceRecord, ...]
    max_len: int = DEFAULT_HISTORY_LEN

    def texts(self) -> list[str]:
        return [r.text for r in self.history]

    def joined(self) -> str:
        return " ".join(self.texts())


@dataclass
class PoolEntry:
    text: str
    emotion: EmotionLabel
    embedding: np.ndarray | None = None


@dataclass
class CandidatePool:
    side: str
    entries: list[PoolEntry] = field(default_factory=list)
    by_emotion: dict[str, list[int]] = field(default_factory=dict)

    def add(self, entry: PoolEntry) -> None:
        self.entries.append(entry)
        self.by_emotion.setdefault(entry.emotion.name, []).append(len(self.entries) - 1)

    def __len__(self) -> int:
        return len(self.entries)


def tokenize(text: str) -> list[str]:
    """Lowercase, punctuation-separated tokens; idempotent on its own output."""
    return _TOKEN_RE.findall(text.lower())


def _role_for(turn_idx: int) -> str:
    return ROLE_SPEAKER if turn_idx % 2 == 0 else ROLE_LISTENER


def parse_ed_csv(path: str | Path, catalog: EmotionCatalog) -> list[UtteranceRecord]:
    """Parse an ED-style CSV into canonicalized records.

    Records come back grouped by conversation and ordered by utterance
    index; the file's 1-based utterance_idx becomes a 0-based turn_idx.
    """
    path = Path(path)
    required = {"conv_id", "utterance_idx", "context", "prompt", "utterance"}
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CorpusError(f"{path}: empty file, no header")
        missing = required - set(reader.fieldnames)
        if missing:
            raise CorpusError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            rows.append(row)

    grouped: dict[str, list[UtteranceRecord]] = {}
    for row in rows:
        raw_idx = int(row["utterance_idx"])
        if raw_idx < 1:
            raise CorpusError(f"utterance_idx must be >= 1, got {raw_idx}")
        text = row["utterance"].replace("_comma_", ",").strip()
        if not text:
            raise CorpusError(f"empty utterance in conversation {row['conv_id']!r}")
        turn_idx = raw_idx - 1
        rec = UtteranceRecord(
            conv_id=row["conv_id"],
            turn_idx=turn_idx,
            role=_role_for(turn_idx),
            text=text,
            situation_emotion=catalog.resolve_label(row["context"].strip()),
            situation_prompt=row["prompt"].replace("_comma_", ",").strip(),
        )
        grouped.setdefault(rec.conv_id, []).append(rec)

    records: list[UtteranceRecord] = []
    for conv_id in grouped:
        records.extend(sorted(grouped[conv_id], key=lambda r: r.turn_idx))
    return records


def records_to_jsonl(records: list[UtteranceRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "conv_id": r.conv_id,
                        "turn_idx": r.turn_idx,
                        "role": r.role,
                        "text": r.text,
                        "situation_emotion": r.situation_emotion.name,
                        "situation_prompt": r.situation_prompt,
                    }
                )
            )
            fh.write("\n")


def records_from_jsonl(path: str | Path, catalog: EmotionCatalog) -> list[UtteranceRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            records.append(
                UtteranceRecord(
                    conv_id=d["conv_id"],
                    turn_idx=int(d["turn_idx"]),
                    role=d["role"],
                    text=d["text"],
                    situation_emotion=catalog.resolve_label(d["situation_emotion"]),
                    situation_prompt=d["situation_prompt"],
                )
            )
    return records


def conversations(records: list[UtteranceRecord]) -> dict[str, list[UtteranceRecord]]:
    convs: dict[str, list[UtteranceRecord]] = {}
    for r in records:
        convs.setdefault(r.conv_id, []).append(r)
    for conv in convs.values():
        conv.sort(key=lambda r: r.turn_idx)
    return convs


def build_pools(records: list[UtteranceRecord]) -> tuple[CandidatePool, CandidatePool]:
    """Partition records into (listener, speaker) candidate pools."""
    listener = CandidatePool(side=ROLE_LISTENER)
    speaker = CandidatePool(side=ROLE_SPEAKER)
    for r in records:
        pool = speaker if r.role == ROLE_SPEAKER else listener
        pool.add(PoolEntry(text=r.text, emotion=r.situation_emotion))
    return listener, speaker


def make_context(
    conv_records: list[UtteranceRecord], upto_turn: int, max_len: int = DEFAULT_HISTORY_LEN
) -> DialogueContext:
    """Window of the last min(max_len, upto_turn + 1) turns ending at upto_turn."""
    if max_len < 1:
        raise CorpusError("history length must be >= 1")
    ordered = sorted(conv_records, key=lambda r: r.turn_idx)
    if not 0 <= upto_turn < len(ordered):
        raise CorpusError(f"turn {upto_turn} out of range for conversation of {len(ordered)}")
    start = max(0, upto_turn + 1 - max_len)
    return DialogueContext(history=tuple(ordered[start : upto_turn + 1]), max_len=max_len)


class Vocab:
    """Token-to-id map with reserved ids: 0 pad, 1 unk, 2 end-of-sequence,
    then one trainable slot per catalog emotion, then corpus tokens."""

    def __init__(self, catalog: EmotionCatalog, tokens: list[str]):
        self.catalog = catalog
        self._token_to_id: dict[str, int] = {}
        self.emotion_token_ids: dict[str, int] = {}
        next_id = 3
        for lab in catalog:
            self.emotion_token_ids[lab.name] = next_id
            next_id += 1
        self._first_word_id = next_id
        for tok in tokens:
            if tok in self._token_to_id:
                raise CorpusError(f"duplicate vocab token {tok!r}")
            self._token_to_id[tok] = next_id
            next_id += 1
        self._id_to_token = {i: t for t, i in self._token_to_id.items()}
        self.size = next_id

    def id_of(self, token: str) -> int:
        return self._token_to_id.get(token, UNK_ID)

    def emotion_id(self, label: EmotionLabel | str) -> int:
        name = label.name if isinstance(label, EmotionLabel) else label
        try:
            return self.emotion_token_ids[name]
        except KeyError:
            raise CatalogError(f"no reserved vocab id for emotion {name!r}") from None

    def encode(self, text: str) -> np.ndarray:
        ids = [self.id_of(t) for t in tokenize(text)]
        return np.asarray(ids, dtype=np.intp)

    def decode(self, ids) -> str:
        emo_names = {i: f"<{name}>" for name, i in self.emotion_token_ids.items()}
        words = []
        for i in map(int, ids):
            if i in (PAD_ID, EOS_ID):
                continue
            if i == UNK_ID:
                words.append("<unk>")
            elif i in emo_names:
                words.append(emo_names[i])
            else:
                words.append(self._id_to_token.get(i, "<unk>"))
        return " ".join(words)

    def tokens(self) -> list[str]:
        return list(self._token_to_id)


def build_vocab(
    records: list[UtteranceRecord], catalog: EmotionCatalog, min_count: int = 1
) -> Vocab:
    """Count tokens over all utterances; keep those seen >= min_count times,
    ordered by (descending count, token) for a stable layout."""
    if min_count < 1:
        raise CorpusError("min_count must be >= 1")
    counts: dict[str, int] = {}
    for r in records:
        for tok in tokenize(r.text):
            counts[tok] = counts.get(tok, 0) + 1
    kept = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
    return Vocab(catalog, kept)


def split_records(
    records: list[UtteranceRecord], fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
) -> dict[str, list[UtteranceRecord]]:
    """Deterministic train/valid/test split by conversation-id hash.

    Whole conversations land in one split, so no dialogue leaks across them.
    """
    out: dict[str, list[UtteranceRecord]] = {"train": [], "valid": [], "test": []}
    lo_train = fractions[0]
    lo_valid = fractions[0] + fractions[1]
    for conv_id, conv in conversations(records).items():
        digest = hashlib.md5(conv_id.encode("utf-8")).hexdigest()
        u = int(digest[:8], 16) / 0x100000000
        split = "train" if u < lo_train else ("valid" if u < lo_valid else "test")
        out[split].extend(conv)
    return out
