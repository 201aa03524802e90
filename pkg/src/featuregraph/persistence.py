"""Stable on-disk format for models, graphs, and reports.

Documents are UTF-8 JSON written by a canonical serializer: fixed key order
(insertion order of the builders), floats printed with 17 significant digits
so every finite double round-trips bit-exactly, atomic replace on write.
Loading validates the schema strictly and rejects unknown fields by path, so
future format changes fail loudly instead of silently dropping data.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import DataError, NumericError, SchemaError, VersionError
from .graph import FeatureGraph, Node, build_layout
from .svr import LinearModel

FORMAT_VERSION = 1


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise NumericError(f"cannot serialize non-finite value {x!r}")
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"  # keep the value a float on reload
    return s


def canonical_dumps(value, indent: int = 0) -> str:
    """Serialize to JSON text with deterministic layout and exact floats."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [canonical_dumps(v, indent + 1) for v in value]
        if all(len(s) < 24 and "\n" not in s for s in items) and len(items) <= 1000:
            return "[" + ", ".join(items) + "]"
        return "[\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        parts = []
        for key, v in value.items():
            if not isinstance(key, str):
                raise DataError(f"document keys must be strings, got {key!r}")
            parts.append(inner + json.dumps(key, ensure_ascii=False) + ": " + canonical_dumps(v, indent + 1))
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    raise DataError(f"cannot serialize value of type {type(value).__name__}")


def write_text_atomic(path, text: str) -> None:
    """Write via a temp file and rename, so readers never see partial output."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_document(path, value) -> None:
    write_text_atomic(path, canonical_dumps(value) + "\n")


@dataclass
class ModelDocument:
    """Versioned envelope for a stored svm or fga model."""

    kind: str
    payload: dict
    metadata: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION


_TOP_KEYS = ("format_version", "kind", "payload", "metadata")
_METADATA_KEYS = {"dataset", "seed", "config", "timestamp"}
_SVM_KEYS = ("weights", "bias")
_FGA_KEYS = ("D", "M", "layer_sizes", "permutation", "nodes")
_NODE_KEYS = ("layer", "position", "input_refs", "weights", "bias", "retrained")


def _require_keys(obj: dict, allowed, path: str, required=None) -> None:
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"unknown field {path}.{key}")
    for key in required or allowed:
        if key not in obj:
            raise SchemaError(f"missing field {path}.{key}")


def _check_number_list(value, path: str) -> None:
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise SchemaError(f"field {path} must be a list of numbers")


def validate_document(raw: dict) -> None:
    if not isinstance(raw, dict):
        raise SchemaError("document root must be an object")
    if "format_version" not in raw:
        raise SchemaError("missing field $.format_version")
    if raw["format_version"] != FORMAT_VERSION:
        raise VersionError(
            f"unsupported format_version {raw['format_version']!r}; this build reads version {FORMAT_VERSION}"
        )
    _require_keys(raw, _TOP_KEYS, "$")
    kind = raw["kind"]
    if kind not in ("svm", "fga"):
        raise SchemaError(f"field $.kind must be 'svm' or 'fga', got {kind!r}")
    meta = raw["metadata"]
    if not isinstance(meta, dict):
        raise SchemaError("field $.metadata must be an object")
    for key in meta:
        if key not in _METADATA_KEYS:
            raise SchemaError(f"unknown field $.metadata.{key}")
    payload = raw["payload"]
    if not isinstance(payload, dict):
        raise SchemaError("field $.payload must be an object")
    if kind == "svm":
        _require_keys(payload, _SVM_KEYS, "$.payload")
        _check_number_list(payload["weights"], "$.payload.weights")
        if not isinstance(payload["bias"], (int, float)) or isinstance(payload["bias"], bool):
            raise SchemaError("field $.payload.bias must be a number")
    else:
        _require_keys(payload, _FGA_KEYS, "$.payload")
        for key in ("D", "M"):
            if not isinstance(payload[key], int) or isinstance(payload[key], bool):
                raise SchemaError(f"field $.payload.{key} must be an integer")
        _check_number_list(payload["layer_sizes"], "$.payload.layer_sizes")
        _check_number_list(payload["permutation"], "$.payload.permutation")
        nodes = payload["nodes"]
        if not isinstance(nodes, list):
            raise SchemaError("field $.payload.nodes must be a list")
        for i, node in enumerate(nodes):
            npath = f"$.payload.nodes[{i}]"
            if not isinstance(node, dict):
                raise SchemaError(f"field {npath} must be an object")
            _require_keys(node, _NODE_KEYS, npath)
            _check_number_list(node["input_refs"], f"{npath}.input_refs")
            _check_number_list(node["weights"], f"{npath}.weights")
            if not isinstance(node["retrained"], bool):
                raise SchemaError(f"field {npath}.retrained must be a boolean")


def save(doc: ModelDocument, path) -> None:
    raw = {
        "format_version": doc.format_version,
        "kind": doc.kind,
        "payload": doc.payload,
        "metadata": doc.metadata,
    }
    validate_document(json.loads(canonical_dumps(raw)))
    write_document(path, raw)


def load(path) -> ModelDocument:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from exc
    validate_document(raw)
    return ModelDocument(
        kind=raw["kind"],
        payload=raw["payload"],
        metadata=raw["metadata"],
        format_version=raw["format_version"],
    )


def document_from_model(model: LinearModel, metadata: dict | None = None) -> ModelDocument:
    payload = {"weights": [float(w) for w in model.weights], "bias": float(model.bias)}
    return ModelDocument(kind="svm", payload=payload, metadata=dict(metadata or {}))


def model_from_document(doc: ModelDocument) -> LinearModel:
    if doc.kind != "svm":
        raise SchemaError(f"expected an svm document, got kind {doc.kind!r}")
    return LinearModel(weights=np.array(doc.payload["weights"], dtype=float), bias=float(doc.payload["bias"]))


def document_from_graph(graph: FeatureGraph, metadata: dict | None = None) -> ModelDocument:
    nodes = []
    for layer in graph.nodes:
        for node in layer:
            nodes.append(
                {
                    "layer": node.layer,
                    "position": node.position,
                    "input_refs": [int(r) for r in node.input_refs],
                    "weights": [float(w) for w in node.model.weights],
                    "bias": float(node.model.bias),
                    "retrained": bool(node.retrained),
                }
            )
    payload = {
        "D": graph.layout.D,
        "M": graph.layout.M,
        "layer_sizes": [int(s) for s in graph.layout.layer_sizes],
        "permutation": [int(p) for p in graph.permutation],
        "nodes": nodes,
    }
    return ModelDocument(kind="fga", payload=payload, metadata=dict(metadata or {}))


def graph_from_document(doc: ModelDocument) -> FeatureGraph:
    if doc.kind != "fga":
        raise SchemaError(f"expected an fga document, got kind {doc.kind!r}")
    payload = doc.payload
    layout = build_layout(int(payload["D"]), int(payload["M"]))
    if list(layout.layer_sizes) != [int(s) for s in payload["layer_sizes"]]:
        raise SchemaError(
            f"layer_sizes {payload['layer_sizes']} do not match the layout for D={payload['D']}, M={payload['M']}"
        )
    layers: list[list[Node]] = [[] for _ in layout.layer_sizes]
    for entry in payload["nodes"]:
        node = Node(
            layer=int(entry["layer"]),
            position=int(entry["position"]),
            input_refs=tuple(int(r) for r in entry["input_refs"]),
            model=LinearModel(np.array(entry["weights"], dtype=float), float(entry["bias"])),
            retrained=bool(entry["retrained"]),
        )
        if not 0 <= node.layer < len(layers):
            raise SchemaError(f"node layer {node.layer} out of range")
        layers[node.layer].append(node)
    for l, expected in enumerate(layout.layer_sizes):
        if len(layers[l]) != expected:
            raise SchemaError(f"layer {l} has {len(layers[l])} nodes, layout expects {expected}")
        layers[l].sort(key=lambda n: n.position)
        if [n.position for n in layers[l]] != list(range(expected)):
            raise SchemaError(f"layer {l} positions are not 0..{expected - 1}")
    return FeatureGraph(layout=layout, nodes=layers, permutation=np.array(payload["permutation"], dtype=int))


def now_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
