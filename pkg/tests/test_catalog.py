"""Emotion catalog: merges, VA table, persistence."""

import json

import pytest

from cheerbot.catalog import (
    CatalogError,
    EmotionCatalog,
    EmotionLabel,
    VAPoint,
    catalog_from_config,
    load_default_catalog,
    save_catalog,
)


def test_default_catalog_has_29_canonical_labels(full_catalog):
    assert len(full_catalog) == 29
    assert len(set(full_catalog.names)) == 29
    for i, lab in enumerate(full_catalog):
        assert lab.id == i


def test_default_merges_collapse_three_raw_names(full_catalog):
    assert full_catalog.resolve_label("prepared").name == "confident"
    assert full_catalog.resolve_label("sentimental").name == "nostalgic"
    assert full_catalog.resolve_label("terrified").name == "afraid"
    # canonical names resolve to themselves
    assert full_catalog.resolve_label("afraid").name == "afraid"
    with pytest.raises(CatalogError):
        full_catalog.resolve_label("zen")


def test_default_seed_table_has_19_entries_with_known_anchors(full_catalog):
    assert len(full_catalog.seed_set) == 19
    afraid = full_catalog.va_of("afraid")
    assert (afraid.valence, afraid.arousal) == (-0.12, 0.79)
    joyful = full_catalog.va_of("joyful")
    assert (joyful.valence, joyful.arousal) == (0.85, 0.15)


def test_default_catalog_leaves_ten_labels_for_bootstrap(full_catalog):
    missing = [lab.name for lab in full_catalog if not full_catalog.has_va(lab)]
    assert len(missing) == 10
    with pytest.raises(CatalogError):
        full_catalog.va_of(missing[0])


def test_vapoint_clamps_and_rejects_nonfinite():
    p = VAPoint(1.5, -2.0)
    assert (p.valence, p.arousal) == (1.0, -1.0)
    with pytest.raises(CatalogError):
        VAPoint(float("nan"), 0.0)


def test_label_requires_nonempty_name():
    with pytest.raises(CatalogError):
        EmotionLabel(id=0, name="")


def test_catalog_from_config_id_assignment_skips_merged():
    cfg = {
        "labels": ["a", "b", "c"],
        "merges": {"b": "a"},
        "va_seed": {"a": [0.5, 0.5]},
    }
    cat = catalog_from_config(cfg)
    assert cat.names == ["a", "c"]
    assert cat.label("c").id == 1
    assert cat.resolve_label("b").id == 0


def test_catalog_config_errors():
    with pytest.raises(CatalogError):
        catalog_from_config({"labels": []})
    with pytest.raises(CatalogError):
        catalog_from_config({"labels": ["a"], "merges": {"x": "a"}})
    with pytest.raises(CatalogError):
        catalog_from_config({"labels": ["a", "b", "c"], "merges": {"a": "b", "b": "c"}})
    with pytest.raises(CatalogError):
        catalog_from_config({"labels": ["a"], "va_seed": {"ghost": [0, 0]}})


def test_with_va_entries_refuses_seed_overwrite(full_catalog):
    with pytest.raises(CatalogError):
        full_catalog.with_va_entries({"afraid": VAPoint(0.0, 0.0)})
    # identical value is a no-op, not an overwrite
    same = full_catalog.with_va_entries({"afraid": VAPoint(-0.12, 0.79)})
    assert same.va_of("afraid") == full_catalog.va_of("afraid")


def test_with_va_entries_extends_without_mutating_original(full_catalog):
    missing = next(lab.name for lab in full_catalog if not full_catalog.has_va(lab))
    extended = full_catalog.with_va_entries({missing: VAPoint(0.1, 0.2)})
    assert extended.has_va(missing)
    assert not full_catalog.has_va(missing)
    assert extended.seed_set == full_catalog.seed_set


def test_save_load_roundtrip_preserves_everything(full_catalog, tmp_path):
    completed = full_catalog.with_va_entries(
        {lab.name: VAPoint(0.25, -0.5) for lab in full_catalog if not full_catalog.has_va(lab)}
    )
    path = tmp_path / "cat.json"
    save_catalog(completed, path)
    loaded = catalog_from_config(json.loads(path.read_text()))
    assert loaded.names == completed.names
    assert loaded.merge_map == completed.merge_map
    assert loaded.seed_set == completed.seed_set
    for lab in completed:
        assert loaded.va_of(lab) == completed.va_of(lab)


def test_saved_file_separates_seed_from_bootstrapped(full_catalog, tmp_path):
    missing = [lab.name for lab in full_catalog if not full_catalog.has_va(lab)]
    completed = full_catalog.with_va_entries({n: VAPoint(0.0, 0.0) for n in missing})
    path = tmp_path / "cat.json"
    save_catalog(completed, path)
    config = json.loads(path.read_text())
    assert set(config["va_bootstrapped"]) == set(missing)
    assert set(config["va_seed"]) == set(full_catalog.seed_set)
