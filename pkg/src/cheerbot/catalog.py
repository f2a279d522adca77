"""Emotion labels, the valence-arousal coordinate system, and label merging.

The catalog is immutable after construction and safe to share read-only.
Completing the VA table (after pseudo-label bootstrapping) produces a new
catalog instead of mutating the old one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class VAPoint:
    """A point in valence-arousal space, clamped into [-1, 1] x [-1, 1]."""

    valence: float
    arousal: float

    def __post_init__(self):
        for name in ("valence", "arousal"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise CatalogError(f"{name} must be finite")
            object.__setattr__(self, name, min(1.0, max(-1.0, v)))


@dataclass(frozen=True)
class EmotionLabel:
    id: int
    name: str

    def __post_init__(self):
        if not self.name:
            raise CatalogError("label name must be nonempty")


class EmotionCatalog:
    """Ordered canonical labels, raw-name merges, and the (partial) VA table.

    Label ids are file positions, so they are reproducible across loads of
    the same config.  `seed_set` marks labels whose VA came from the config
    rather than from bootstrapping.
    """

    def __init__(
        self,
        labels: list[EmotionLabel],
        merge_map: dict[str, str],
        va_table: dict[str, VAPoint],
        seed_set: frozenset[str],
    ):
        self.labels: tuple[EmotionLabel, ...] = tuple(labels)
        self.merge_map = dict(merge_map)
        self.va_table = dict(va_table)
        self.seed_set = frozenset(seed_set)
        self._by_name = {lab.name: lab for lab in self.labels}
        if len(self._by_name) != len(self.labels):
            raise CatalogError("duplicate label name")
        for raw, canon in self.merge_map.items():
            if canon not in self._by_name:
                raise CatalogError(f"merge target {canon!r} is not a declared label")
            if raw in self._by_name:
                raise CatalogError(f"merge source {raw!r} still listed as canonical")
        for name in self.va_table:
            if name not in self._by_name:
                raise CatalogError(f"VA entry for unknown label {name!r}")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    @property
    def names(self) -> list[str]:
        return [lab.name for lab in self.labels]

    def label(self, name: str) -> EmotionLabel:
        try:
            return self._by_name[name]
        except KeyError:
            raise CatalogError(f"unknown label {name!r}") from None

    def by_id(self, idx: int) -> EmotionLabel:
        return self.labels[idx]

    def resolve_label(self, raw_name: str) -> EmotionLabel:
        """Map a raw or canonical name to its canonical post-merge label."""
        name = self.merge_map.get(raw_name, raw_name)
        if name not in self._by_name:
            raise CatalogError(f"unknown emotion name {raw_name!r}")
        return self._by_name[name]

    def va_of(self, label: EmotionLabel | str) -> VAPoint:
        name = label.name if isinstance(label, EmotionLabel) else label
        try:
            return self.va_table[name]
        except KeyError:
            raise CatalogError(
                f"label {name!r} has no VA assigned (bootstrap has not run)"
            ) from None

    def has_va(self, label: EmotionLabel | str) -> bool:
        name = label.name if isinstance(label, EmotionLabel) else label
        return name in self.va_table

    def with_va_entries(self, entries: dict[str, VAPoint]) -> "EmotionCatalog":
        """New catalog with extra VA entries; existing entries may not change."""
        table = dict(self.va_table)
        for name, point in entries.items():
            if name in table and table[name] != point:
                raise CatalogError(f"refusing to overwrite VA for {name!r}")
            table[name] = point
        return EmotionCatalog(list(self.labels), self.merge_map, table, self.seed_set)


def _check_va_pair(name: str, pair) -> VAPoint:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise CatalogError(f"VA entry for {name!r} must be [valence, arousal]")
    v, a = float(pair[0]), float(pair[1])
    for axis, value in (("valence", v), ("arousal", a)):
        if not math.isfinite(value) or not -1.0 <= value <= 1.0:
            raise CatalogError(f"{axis} for {name!r} outside [-1, 1]: {value}")
    return VAPoint(v, a)


def catalog_from_config(config: dict) -> EmotionCatalog:
    raw_labels = config.get("labels")
    if not isinstance(raw_labels, list) or not raw_labels:
        raise CatalogError("config needs a nonempty 'labels' array")
    merges = config.get("merges", {})
    for raw, canon in merges.items():
        if raw not in raw_labels:
            raise CatalogError(f"merge source {raw!r} is not a declared label")
        if canon not in raw_labels:
            raise CatalogError(f"merge target {canon!r} is not a declared label")
        if canon in merges:
            raise CatalogError(f"merge chain/cycle through {canon!r}")

    labels: list[EmotionLabel] = []
    for name in raw_labels:
        if name in merges:
            continue
        if any(lab.name == name for lab in labels):
            raise CatalogError(f"duplicate label name {name!r}")
        labels.append(EmotionLabel(id=len(labels), name=name))

    va_table: dict[str, VAPoint] = {}
    seed_names: list[str] = []
    for name, pair in config.get("va_seed", {}).items():
        va_table[name] = _check_va_pair(name, pair)
        seed_names.append(name)
    for name, pair in config.get("va_bootstrapped", {}).items():
        if name in va_table:
            raise CatalogError(f"{name!r} is both seeded and bootstrapped")
        va_table[name] = _check_va_pair(name, pair)

    return EmotionCatalog(labels, merges, va_table, frozenset(seed_names))


def load_catalog(config_path: str | Path) -> EmotionCatalog:
    """Load a catalog config: UTF-8 JSON with labels, merges, and va_seed."""
    path = Path(config_path)
    if not path.exists():
        raise FileNotFoundError(f"catalog config not found: {path}")
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    return catalog_from_config(config)


def save_catalog(catalog: EmotionCatalog, path: str | Path) -> None:
    """Write the catalog back out, keeping seed and bootstrapped VA separate."""
    raw_labels: list[str] = []
    for lab in catalog.labels:
        raw_labels.append(lab.name)
        raw_labels.extend(raw for raw, canon in catalog.merge_map.items() if canon == lab.name)
    config = {
        "labels": raw_labels,
        "merges": dict(catalog.merge_map),
        "va_seed": {
            name: [p.valence, p.arousal]
            for name, p in catalog.va_table.items()
            if name in catalog.seed_set
        },
        "va_bootstrapped": {
            name: [p.valence, p.arousal]
            for name, p in catalog.va_table.items()
            if name not in catalog.seed_set
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
        fh.write("\n")


def default_catalog_path() -> Path:
    return Path(__file__).parent / "data" / "catalog_ed.json"


def load_default_catalog() -> EmotionCatalog:
    return load_catalog(default_catalog_path())
