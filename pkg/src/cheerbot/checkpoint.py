"""Checkpoint files: one JSON per component with a content hash, plus
directory bundles with a manifest so partial sets load cleanly and any
corruption is caught before parameters reach a model."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .nn import Tensor
from .nn.serialize import FORMAT_VERSION, arrays_from_dict, load_params_dict, params_to_dict

MANIFEST_NAME = "manifest.json"


class CheckpointError(RuntimeError):
    pass


def _payload_hash(payload: dict) -> str:
    core = {
        "format_version": payload["format_version"],
        "component": payload["component"],
        "meta": payload["meta"],
        "shapes": payload["shapes"],
        "flat_values": payload["flat_values"],
    }
    return hashlib.sha256(json.dumps(core, sort_keys=True).encode("utf-8")).hexdigest()


def save_checkpoint(
    params: list[Tensor], path: str | Path, component: str, meta: dict | None = None
) -> str:
    """Write one component's parameters; returns the content hash."""
    payload = params_to_dict(params)
    payload["component"] = component
    payload["meta"] = meta or {}
    payload["sha256"] = _payload_hash(payload)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    return payload["sha256"]


def read_checkpoint(
    path: str | Path, expected_component: str | None = None
) -> tuple[list[np.ndarray], str, dict]:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"no checkpoint at {path}")
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    for key in ("component", "meta", "sha256"):
        if key not in payload:
            raise CheckpointError(f"{path}: missing field {key!r}")
    if payload["sha256"] != _payload_hash(payload):
        raise CheckpointError(f"{path}: content hash mismatch (file corrupted or edited)")
    if expected_component is not None and payload["component"] != expected_component:
        raise CheckpointError(
            f"{path}: holds component {payload['component']!r}, wanted {expected_component!r}"
        )
    return arrays_from_dict(payload), payload["component"], payload["meta"]


def load_checkpoint(
    params: list[Tensor], path: str | Path, expected_component: str | None = None
) -> dict:
    """Load parameter values in place; returns the checkpoint's meta dict."""
    arrays, _, meta = read_checkpoint(path, expected_component)
    if len(arrays) != len(params):
        raise CheckpointError(
            f"{path}: {len(arrays)} arrays for {len(params)} model parameters"
        )
    d = {"format_version": FORMAT_VERSION}
    for tensor, arr in zip(params, arrays):
        if tensor.data.shape != arr.shape:
            raise CheckpointError(f"{path}: parameter shape mismatch {arr.shape}")
        tensor.data = arr
    return meta


def _file_hash(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def save_bundle(directory: str | Path, components: dict[str, tuple[list[Tensor], dict]]) -> dict:
    """Write each component as <name>.json plus a manifest of file hashes.

    Returns the manifest dict.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"format_version": FORMAT_VERSION, "components": {}}
    for name in sorted(components):
        params, meta = components[name]
        file_name = f"{name}.json"
        save_checkpoint(params, directory / file_name, component=name, meta=meta)
        manifest["components"][name] = {
            "file": file_name,
            "sha256": _file_hash(directory / file_name),
        }
    with open(directory / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True)
    return manifest


def load_bundle(
    directory: str | Path, names: list[str] | None = None
) -> dict[str, tuple[list[np.ndarray], dict]]:
    """Load (a subset of) a bundle, verifying manifest hashes first.

    `names=None` loads whatever the manifest lists; asking for a component
    the bundle does not carry raises with the missing name.
    """
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise CheckpointError(f"no bundle manifest at {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    listed = manifest.get("components", {})
    wanted = list(listed) if names is None else names
    out: dict[str, tuple[list[np.ndarray], dict]] = {}
    for name in wanted:
        if name not in listed:
            raise CheckpointError(f"bundle at {directory} has no component {name!r}")
        entry = listed[name]
        file_path = directory / entry["file"]
        if not file_path.exists():
            raise CheckpointError(f"bundle file missing: {file_path}")
        if _file_hash(file_path) != entry["sha256"]:
            raise CheckpointError(f"{file_path}: hash mismatch against bundle manifest")
        arrays, _, meta = read_checkpoint(file_path, expected_component=name)
        out[name] = (arrays, meta)
    return out
