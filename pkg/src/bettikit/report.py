"""Analysis reports: JSON schema, canonical serialization, validation.

Reports are plain dicts rendered as canonical JSON (sorted keys, fixed
indentation, trailing newline) so identical runs produce byte-identical
files.  Floats use Python's shortest repr and re-parse losslessly.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import FormatError
from .filters import Histogram

_HISTOGRAM = {
    "type": "object",
    "required": ["bin_width", "counts", "total"],
    "additionalProperties": False,
    "properties": {
        "bin_width": {"type": "integer", "minimum": 1},
        "counts": {
            "type": "object",
            "propertyNames": {"pattern": "^(-?[0-9]+|NONE)$"},
            "additionalProperties": {"type": "integer", "minimum": 1},
        },
        "total": {"type": "integer", "minimum": 1},
    },
}

_CONFIG = {
    "type": "object",
    "required": ["k", "ordering", "bin_width", "guard", "budget", "seed"],
    "properties": {
        "k": {"type": "integer", "minimum": 0},
        "ordering": {"enum": ["descending", "ascending"]},
        "bin_width": {"type": "integer", "minimum": 1},
        "guard": {"type": ["integer", "null"]},
        "budget": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "categories": {"type": ["array", "null"], "items": {"type": "string"}},
        "per_class": {"type": ["integer", "null"], "minimum": 1},
    },
}

_ASSESS = {
    "type": "object",
    "required": ["kind", "config", "iterations", "filters", "effectiveness_order", "prune_order"],
    "properties": {
        "kind": {"const": "assess"},
        "config": _CONFIG,
        "iterations": {"type": "array", "minItems": 2, "items": {"type": "integer"}},
        "filters": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {
                "type": "object",
                "required": ["categories", "effective_set", "score"],
                "properties": {
                    "categories": {
                        "type": "object",
                        "minProperties": 1,
                        "additionalProperties": {
                            "type": "object",
                            "required": ["entropies", "delta_h", "seds", "histograms"],
                            "properties": {
                                "entropies": {"type": "array", "items": {"type": "number", "minimum": 0}},
                                "delta_h": {"type": "number"},
                                "seds": {
                                    "type": "array",
                                    "items": {"type": "array", "items": {"type": ["integer", "null"]}},
                                },
                                "histograms": {"type": "array", "items": _HISTOGRAM},
                            },
                        },
                    },
                    "effective_set": {"type": "array", "items": {"type": "string"}},
                    "score": {"type": "number", "maximum": 0},
                },
            },
        },
        "effectiveness_order": {"type": "array", "items": {"type": "string"}},
        "prune_order": {"type": "array", "items": {"type": "string"}},
    },
}

_CDMATRIX = {
    "type": "object",
    "required": ["kind", "config", "categories", "histograms", "cd_matrix", "distinguishable_degrees"],
    "properties": {
        "kind": {"const": "cdmatrix"},
        "config": _CONFIG,
        "categories": {"type": "array", "minItems": 2, "items": {"type": "string"}},
        "histograms": {"type": "object", "additionalProperties": _HISTOGRAM},
        "cd_matrix": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        },
        "distinguishable_degrees": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}

REPORT_SCHEMA = {"oneOf": [_ASSESS, _CDMATRIX]}

NONE_KEY = "NONE"


def histogram_to_json(h: Histogram) -> dict:
    counts = {NONE_KEY if label is None else str(label): count for label, count in h.counts.items()}
    return {"bin_width": h.bin_width, "counts": counts, "total": h.total}


def histogram_from_json(doc: dict) -> Histogram:
    counts = {None if key == NONE_KEY else int(key): count for key, count in doc["counts"].items()}
    return Histogram(counts=counts, bin_width=doc["bin_width"])


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def validate_report(report: dict) -> None:
    """Schema-check a report and verify embedded histogram totals."""
    try:
        jsonschema.validate(report, REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise FormatError(f"report schema violation: {exc.message}") from exc
    for hist in _iter_histograms(report):
        if sum(hist["counts"].values()) != hist["total"]:
            raise FormatError(f"histogram total {hist['total']} does not match its counts")


def _iter_histograms(report: dict):
    if report.get("kind") == "cdmatrix":
        yield from report["histograms"].values()
    elif report.get("kind") == "assess":
        for fdoc in report["filters"].values():
            for cdoc in fdoc["categories"].values():
                yield from cdoc["histograms"]


def save_report(report: dict, path) -> None:
    validate_report(report)
    Path(path).write_text(dumps_report(report))


def load_report(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FormatError(f"no such report: {path}")
    try:
        report = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    validate_report(report)
    return report
