"""Checkpoint files and bundles: round-trips, hashes, tamper detection."""

import json

import numpy as np
import pytest

from cheerbot.checkpoint import (
    CheckpointError,
    load_bundle,
    load_checkpoint,
    read_checkpoint,
    save_bundle,
    save_checkpoint,
)
from cheerbot.nn import Tensor


def _params(seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return [
        Tensor(rng.normal(size=(3, 4)) * scale, requires_grad=True),
        Tensor(rng.normal(size=(4,)) * scale, requires_grad=True),
    ]


def test_roundtrip_is_bitwise(tmp_path):
    params = _params(scale=1e-7)
    originals = [p.data.copy() for p in params]
    path = tmp_path / "det.json"
    save_checkpoint(params, path, component="detector", meta={"seed": 3})
    target = _params(seed=9)
    meta = load_checkpoint(target, path, expected_component="detector")
    assert meta == {"seed": 3}
    for t, orig in zip(target, originals):
        assert t.data.dtype == np.float64
        assert np.array_equal(t.data, orig)
        assert t.data.tobytes() == orig.tobytes()


def test_save_returns_stable_hash(tmp_path):
    params = _params()
    h1 = save_checkpoint(params, tmp_path / "a.json", component="x")
    h2 = save_checkpoint(params, tmp_path / "b.json", component="x")
    assert h1 == h2
    h3 = save_checkpoint(params, tmp_path / "c.json", component="y")
    assert h3 != h1  # component name is part of the hashed payload


def test_tampered_value_is_detected(tmp_path):
    path = tmp_path / "ck.json"
    save_checkpoint(_params(), path, component="x")
    payload = json.loads(path.read_text())
    payload["flat_values"][0] = repr(12345.0)
    path.write_text(json.dumps(payload))
    with pytest.raises(CheckpointError, match="content hash mismatch"):
        read_checkpoint(path)


def test_tampered_meta_is_detected(tmp_path):
    path = tmp_path / "ck.json"
    save_checkpoint(_params(), path, component="x", meta={"seed": 1})
    payload = json.loads(path.read_text())
    payload["meta"]["seed"] = 2
    path.write_text(json.dumps(payload))
    with pytest.raises(CheckpointError, match="content hash mismatch"):
        read_checkpoint(path)


def test_wrong_component_is_refused(tmp_path):
    path = tmp_path / "ck.json"
    save_checkpoint(_params(), path, component="detector")
    with pytest.raises(CheckpointError, match="holds component 'detector', wanted 'qnet'"):
        read_checkpoint(path, expected_component="qnet")


def test_missing_file_and_fields(tmp_path):
    with pytest.raises(CheckpointError, match="no checkpoint at"):
        read_checkpoint(tmp_path / "absent.json")
    path = tmp_path / "bare.json"
    path.write_text(json.dumps({"shapes": [], "flat_values": []}))
    with pytest.raises(CheckpointError, match="missing field"):
        read_checkpoint(path)


def test_load_rejects_mismatched_shapes(tmp_path):
    path = tmp_path / "ck.json"
    save_checkpoint(_params(), path, component="x")
    wrong_count = [Tensor(np.zeros((3, 4)))]
    with pytest.raises(CheckpointError, match="arrays for 1 model parameters"):
        load_checkpoint(wrong_count, path)
    wrong_shape = [Tensor(np.zeros((3, 4))), Tensor(np.zeros((5,)))]
    with pytest.raises(CheckpointError, match="shape mismatch"):
        load_checkpoint(wrong_shape, path)


def test_bundle_roundtrip(tmp_path):
    det = _params(seed=1)
    qnet = _params(seed=2)
    manifest = save_bundle(
        tmp_path / "bundle",
        {"detector": (det, {"seed": 1}), "qnet": (qnet, {"seed": 2})},
    )
    assert set(manifest["components"]) == {"detector", "qnet"}
    out = load_bundle(tmp_path / "bundle")
    assert set(out) == {"detector", "qnet"}
    arrays, meta = out["qnet"]
    assert meta == {"seed": 2}
    for arr, p in zip(arrays, qnet):
        assert np.array_equal(arr, p.data)


def test_bundle_partial_load_and_missing_component(tmp_path):
    save_bundle(tmp_path / "b", {"detector": (_params(), {})})
    out = load_bundle(tmp_path / "b", names=["detector"])
    assert list(out) == ["detector"]
    with pytest.raises(CheckpointError, match="has no component 'qnet'"):
        load_bundle(tmp_path / "b", names=["qnet"])


def test_bundle_detects_edited_component_file(tmp_path):
    save_bundle(tmp_path / "b", {"detector": (_params(), {})})
    target = tmp_path / "b" / "detector.json"
    payload = json.loads(target.read_text())
    payload["meta"] = {"sneaky": True}
    target.write_text(json.dumps(payload))
    with pytest.raises(CheckpointError, match="hash mismatch against bundle manifest"):
        load_bundle(tmp_path / "b")


def test_bundle_detects_deleted_file_and_missing_manifest(tmp_path):
    save_bundle(tmp_path / "b", {"detector": (_params(), {})})
    (tmp_path / "b" / "detector.json").unlink()
    with pytest.raises(CheckpointError, match="bundle file missing"):
        load_bundle(tmp_path / "b")
    with pytest.raises(CheckpointError, match="no bundle manifest"):
        load_bundle(tmp_path / "empty")
