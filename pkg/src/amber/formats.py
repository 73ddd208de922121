"""On-disk formats.

Schemes and every output are JSON documents carrying ``format_version``.
Annotation traces are long-format CSV with the header
``time_s,annotator,attribute,value``; segments are CSV with
``segment_id,start_s,end_s``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Mapping

import numpy as np

from .aggregation import AnnotationTrace
from .descriptors import (
    AffineMap,
    AttributeDescriptor,
    Constraint,
    ConstraintKind,
    Kind,
    Scheme,
    TableMap,
    numerical,
)
from .errors import DomainMismatch, InvalidScheme, MissingColumn, ParseError, UnknownDescriptor
from .representation import EmotionRepresentation, representation_from_dict, representation_to_dict

FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)

TRACE_COLUMNS = ("time_s", "annotator", "attribute", "value")
SEGMENT_COLUMNS = ("segment_id", "start_s", "end_s")

_SCHEME_FIELDS = {"format_version", "name", "descriptors", "constraint", "time_constant"}
_DESCRIPTOR_FIELDS = {"name", "kind", "levels", "bounds", "numeric_map"}
_CONSTRAINT_FIELDS = {"kind", "p", "q"}


def _reject_unknown(data: Mapping, allowed: set, where: str):
    if not isinstance(data, Mapping):
        raise InvalidScheme(f"{where}: expected an object")
    extra = set(data) - allowed
    if extra:
        raise InvalidScheme(f"{where}: unknown fields {sorted(extra)}")


def _check_version(data: Mapping, where: str):
    version = data.get("format_version", FORMAT_VERSION)
    if version not in SUPPORTED_VERSIONS:
        raise InvalidScheme(f"{where}: unsupported format_version {version!r}")


# ---------------------------------------------------------------------------
# Schemes
# ---------------------------------------------------------------------------


def descriptor_to_dict(d: AttributeDescriptor) -> dict:
    m = d.numeric_map
    if m is None:
        nm = None
    elif isinstance(m, AffineMap):
        nm = {"type": "affine", "target": list(m.target)}
    else:
        nm = {"type": "table", "values": m.as_dict()}
    return {
        "name": d.name,
        "kind": d.kind.value,
        "levels": list(d.levels),
        "bounds": None if d.bounds is None else list(d.bounds),
        "numeric_map": nm,
    }


def descriptor_from_dict(data: Mapping) -> AttributeDescriptor:
    _reject_unknown(data, _DESCRIPTOR_FIELDS, f"descriptor {data.get('name')!r}")
    try:
        kind = Kind(data["kind"])
    except (KeyError, ValueError):
        raise InvalidScheme(f"descriptor {data.get('name')!r}: bad kind {data.get('kind')!r}") from None
    bounds = data.get("bounds")
    bounds = None if bounds is None else (float(bounds[0]), float(bounds[1]))
    nm = data.get("numeric_map")
    if nm is None:
        numeric_map = None
    else:
        _reject_unknown(nm, {"type", "target", "values"}, f"numeric_map of {data.get('name')!r}")
        if nm.get("type") == "affine":
            numeric_map = AffineMap(bounds, (float(nm["target"][0]), float(nm["target"][1])))
        elif nm.get("type") == "table":
            numeric_map = TableMap.from_mapping(nm["values"])
        else:
            raise InvalidScheme(f"unknown numeric_map type {nm.get('type')!r}")
    return AttributeDescriptor(str(data["name"]), kind, tuple(data.get("levels") or ()), bounds, numeric_map)


def scheme_to_dict(scheme: Scheme) -> dict:
    c = scheme.constraint
    constraint = {"kind": c.kind.value}
    if c.kind is ConstraintKind.BLENDED:
        constraint.update(p=c.p, q=c.q)
    return {
        "format_version": FORMAT_VERSION,
        "name": scheme.name,
        "constraint": constraint,
        "time_constant": scheme.time_constant,
        "descriptors": [descriptor_to_dict(d) for d in scheme.descriptors],
    }


def scheme_from_dict(data: Mapping) -> Scheme:
    _reject_unknown(data, _SCHEME_FIELDS, "scheme")
    _check_version(data, "scheme")
    c = data.get("constraint") or {"kind": "none"}
    _reject_unknown(c, _CONSTRAINT_FIELDS, "constraint")
    try:
        kind = ConstraintKind(c["kind"])
    except (KeyError, ValueError):
        raise InvalidScheme(f"bad constraint kind {c.get('kind')!r}") from None
    constraint = Constraint(kind, c.get("p"), c.get("q"))
    return Scheme(
        str(data["name"]),
        tuple(descriptor_from_dict(d) for d in data["descriptors"]),
        constraint,
        bool(data.get("time_constant", False)),
    )


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def dumps(obj) -> str:
    """Canonical JSON text used for every artifact amber writes."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, ensure_ascii=False) + "\n"


def write_json(obj, path):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def load_scheme(path) -> Scheme:
    return scheme_from_dict(read_json(path))


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------


def representation_document(rep: EmotionRepresentation, scheme: Scheme | None = None, report=None) -> dict:
    doc = {"format_version": FORMAT_VERSION, **representation_to_dict(rep)}
    if scheme is not None:
        doc["scheme_definition"] = scheme_to_dict(scheme)
    if report is not None:
        doc["report"] = report
    return doc


def representation_from_document(doc: Mapping, scheme: Scheme | None = None) -> tuple[EmotionRepresentation, Scheme]:
    _reject_unknown(doc, {"format_version", "scheme", "scheme_definition", "descriptors", "report"}, "representation")
    _check_version(doc, "representation")
    if scheme is None:
        if "scheme_definition" not in doc:
            raise InvalidScheme("representation file has no embedded scheme; pass one explicitly")
        scheme = scheme_from_dict(doc["scheme_definition"])
    return representation_from_dict(doc, scheme), scheme


def load_representation(path, scheme: Scheme | None = None) -> tuple[EmotionRepresentation, Scheme]:
    return representation_from_document(read_json(path), scheme)


# ---------------------------------------------------------------------------
# CSV inputs
# ---------------------------------------------------------------------------


def implicit_scheme(attributes) -> Scheme:
    """Numerical [-1, 1] descriptors for attributes read without a scheme file."""
    return Scheme("implicit", tuple(numerical(a) for a in attributes))


def _open_rows(path, required):
    fh = open(path, newline="", encoding="utf-8")
    reader = csv.DictReader(fh)
    header = reader.fieldnames or []
    missing = [c for c in required if c not in header]
    if missing:
        fh.close()
        raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")
    return fh, reader


def _float(text, what, line):
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"{what} {text!r} is not a number", line) from None
    if not math.isfinite(x):
        raise ParseError(f"{what} {text!r} is not finite", line)
    return x


def ingest_traces(path, scheme: Scheme | None = None) -> list[AnnotationTrace]:
    """Read long-format annotation CSV into one trace per (annotator, attribute).

    Traces come out in order of first appearance.  Without a scheme, every
    attribute is taken to be numerical on [-1, 1].
    """
    fh, reader = _open_rows(path, TRACE_COLUMNS)
    with fh:
        rows = [(n, row) for n, row in enumerate(reader, start=2)]
    if scheme is None:
        scheme = implicit_scheme(dict.fromkeys(row["attribute"] for _, row in rows))
    groups: dict[tuple[str, str], list] = {}
    for line, row in rows:
        if None in row or any(row.get(c) is None for c in TRACE_COLUMNS):
            raise ParseError("wrong number of fields", line)
        t = _float(row["time_s"], "time", line)
        annotator = row["annotator"].strip()
        if not annotator:
            raise ParseError("empty annotator", line)
        try:
            d = scheme[row["attribute"]]
        except UnknownDescriptor:
            raise DomainMismatch(f"unknown attribute {row['attribute']!r}", line) from None
        raw = row["value"].strip()
        value = _float(raw, "value", line) if d.kind is Kind.NUMERICAL else raw
        if not d.contains(value):
            raise DomainMismatch(f"value {raw!r} is outside descriptor {d.name!r}", line)
        groups.setdefault((annotator, d.name), []).append((t, value, line))

    traces = []
    for (annotator, attribute), samples in groups.items():
        samples.sort(key=lambda s: s[0])
        for a, b in zip(samples, samples[1:]):
            if b[0] == a[0]:
                raise ParseError(f"duplicate time {b[0]} for {annotator}/{attribute}", b[2])
        period = None
        if len(samples) > 1:
            period = round(float(np.median(np.diff([s[0] for s in samples]))), 9)
        traces.append(AnnotationTrace(annotator, attribute, tuple((t, v) for t, v, _ in samples), period))
    return traces


def read_segments(path) -> list[tuple[str, float, float]]:
    fh, reader = _open_rows(path, SEGMENT_COLUMNS)
    out = []
    with fh:
        for line, row in enumerate(reader, start=2):
            start = _float(row["start_s"], "start_s", line)
            end = _float(row["end_s"], "end_s", line)
            if not start < end:
                raise ParseError("start_s must be before end_s", line)
            out.append((row["segment_id"], start, end))
    if not out:
        raise ParseError(f"{path}: no segments")
    return out
