"""Snapshot manifests: which filter tensors belong to which training iteration.

A manifest is a JSON file sitting next to (or above) the TFL1 tensors it
references; relative paths resolve against the manifest's directory.  Each
iteration entry carries per-filter kernel tensors and, optionally,
precomputed per-category feature-map stacks keyed by category id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import FormatError
from .formats import read_tensor

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["iterations"],
    "properties": {
        "metadata": {"type": "object"},
        "iterations": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["t"],
                "anyOf": [{"required": ["filters"]}, {"required": ["feature_maps"]}],
                "properties": {
                    "t": {"type": "integer"},
                    "filters": {
                        "type": "object",
                        "minProperties": 1,
                        "additionalProperties": {"type": "string"},
                    },
                    "feature_maps": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "object",
                            "additionalProperties": {"type": "string"},
                        },
                    },
                },
            },
        },
    },
}


@dataclass(frozen=True)
class IterationEntry:
    t: int
    filters: dict = field(default_factory=dict)  # filter id -> tensor path
    feature_maps: dict = field(default_factory=dict)  # filter id -> {category -> stack path}


@dataclass(frozen=True)
class SnapshotManifest:
    iterations: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def filter_ids(self) -> list:
        ids = set()
        for entry in self.iterations:
            ids.update(entry.filters)
            ids.update(entry.feature_maps)
        return sorted(ids)


def load_manifest(path, check_tensors: bool = True) -> SnapshotManifest:
    """Parse and validate a manifest file.

    Validation covers the JSON schema, strictly increasing iteration
    numbers, and (by default) that every referenced tensor file exists and
    parses as TFL1.
    """
    path = Path(path)
    if not path.exists():
        raise FormatError(f"no such manifest: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(doc, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise FormatError(f"{path}: manifest schema violation: {exc.message}") from exc

    root = path.parent
    entries = []
    last_t = None
    for item in doc["iterations"]:
        t = item["t"]
        if last_t is not None and t <= last_t:
            raise FormatError(f"{path}: iteration numbers must be strictly increasing ({last_t} then {t})")
        last_t = t
        filters = {fid: root / p for fid, p in item.get("filters", {}).items()}
        fmaps = {
            fid: {cat: root / p for cat, p in cats.items()}
            for fid, cats in item.get("feature_maps", {}).items()
        }
        entries.append(IterationEntry(t=t, filters=filters, feature_maps=fmaps))

    manifest = SnapshotManifest(iterations=tuple(entries), metadata=doc.get("metadata", {}))
    if check_tensors:
        for entry in manifest.iterations:
            for p in entry.filters.values():
                read_tensor(p)
            for cats in entry.feature_maps.values():
                for p in cats.values():
                    read_tensor(p)
    return manifest
