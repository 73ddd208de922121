"""Full emotion representations over a scheme, and the checks schemes impose on them."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ambiguity import (
    FiniteSupport,
    PointMass,
    TimeVaryingAmbiguity,
    argmax_label,
    evaluate,
    expected_value,
    from_dict,
    to_dict,
)
from .descriptors import (
    ABSENT,
    EUCLIDEAN_ASSUMPTIONS,
    PRESENT,
    TOL,
    ConstraintKind,
    Kind,
    Scheme,
    ValidationReport,
    check_blend_weights,
)
from .errors import (
    EmptyCategory,
    GridMismatch,
    InvalidBlend,
    InvalidWeights,
    PolicyUnsupported,
    SchemeMismatch,
    UnknownDescriptor,
)


@dataclass(frozen=True)
class EmotionRepresentation:
    """Per-descriptor ambiguity functions for one scheme.

    Each entry is either a single function (a label that holds over the
    whole interval) or a :class:`TimeVaryingAmbiguity`.  All time-varying
    entries must share one timestamp grid.
    """

    scheme_ref: str
    per_descriptor: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        entries = dict(self.per_descriptor)
        for name, entry in entries.items():
            if entry.descriptor.name != name:
                raise SchemeMismatch(f"entry {name!r} holds a function over {entry.descriptor.name!r}")
        grids = {entry.times for entry in entries.values() if isinstance(entry, TimeVaryingAmbiguity)}
        if len(grids) > 1:
            raise GridMismatch("time-varying entries use different timestamp grids")
        object.__setattr__(self, "per_descriptor", entries)

    @property
    def times(self) -> tuple[float, ...] | None:
        for entry in self.per_descriptor.values():
            if isinstance(entry, TimeVaryingAmbiguity):
                return entry.times
        return None

    def __getitem__(self, name):
        return self.per_descriptor[name]

    def frames(self):
        """Yield ``(time, {name: function})``; time is None for a fully time-constant representation."""
        times = self.times
        if times is None:
            yield None, dict(self.per_descriptor)
            return
        for i, t in enumerate(times):
            yield t, {
                name: (e.functions[i] if isinstance(e, TimeVaryingAmbiguity) else e)
                for name, e in self.per_descriptor.items()
            }


def _match_scheme(rep: EmotionRepresentation, scheme: Scheme):
    if rep.scheme_ref != scheme.name:
        raise SchemeMismatch(f"representation refers to scheme {rep.scheme_ref!r}, not {scheme.name!r}")
    if set(rep.per_descriptor) != set(scheme.names):
        missing = sorted(set(scheme.names) - set(rep.per_descriptor))
        extra = sorted(set(rep.per_descriptor) - set(scheme.names))
        raise SchemeMismatch(f"descriptor sets differ (missing {missing}, extra {extra})")


def _presence(xi) -> float:
    return evaluate(xi, PRESENT)


def check_scheme_constraints(rep: EmotionRepresentation, scheme: Scheme) -> ValidationReport:
    """Report every way ``rep`` breaks the constraints of ``scheme``.

    Violation strings start with a short code (``descriptor``,
    ``exclusive``, ``blend-sum``, ``blend-count``, ``blend-weight``,
    ``blend-roles``, ``time-constant``) followed by a colon.
    """
    _match_scheme(rep, scheme)
    violations: list[str] = []
    warnings: list[str] = []

    for d in scheme.descriptors:
        entry = rep[d.name]
        if entry.descriptor != d:
            violations.append(f"descriptor: {d.name} function is defined over a different descriptor")
        if scheme.time_constant and isinstance(entry, TimeVaryingAmbiguity):
            if any(f != entry.functions[0] for f in entry.functions[1:]):
                violations.append(f"time-constant: {d.name} changes within the interval")

    c = scheme.constraint
    for t, frame in rep.frames():
        at = "" if t is None else f" at t={t!r}"
        if c.kind is ConstraintKind.MUTUALLY_EXCLUSIVE:
            present = [n for n in scheme.names if _presence(frame[n]) >= 1.0 - TOL]
            for extra in present[1:]:
                violations.append(f"exclusive: {extra} present alongside {present[0]}{at}")
            if not present:
                warnings.append(f"no category present{at} (neutral label)")
        elif c.kind is ConstraintKind.BLENDED:
            weights = {n: _presence(frame[n]) for n in scheme.names}
            total = math.fsum(weights.values())
            if abs(total - 1.0) > TOL:
                violations.append(f"blend-sum: presence weights sum to {total!r}{at}")
            nonzero = [n for n, w in weights.items() if w > 0]
            for n in nonzero:
                w = weights[n]
                if abs(w - c.p) > TOL and abs(w - c.q) > TOL:
                    violations.append(f"blend-weight: {n} has weight {w!r} not in {{p, q}}{at}")
            if len(nonzero) != 2:
                word = "more" if len(nonzero) > 2 else "fewer"
                violations.append(f"blend-count: {word} than two categories present{at} ({len(nonzero)})")
            else:
                roles = sorted(abs(weights[n] - c.q) <= TOL for n in nonzero)
                if roles != [False, True]:
                    violations.append(f"blend-roles: need exactly one major and one minor category{at}")
    return ValidationReport(tuple(violations), tuple(warnings))


def make_blended(major: str, minor: str, q: float, p: float, scheme: Scheme) -> EmotionRepresentation:
    """Blended label: ``major`` present with weight ``q``, ``minor`` with ``p``, the rest absent."""
    for name in (major, minor):
        if name not in scheme:
            raise UnknownDescriptor(f"scheme {scheme.name!r} has no descriptor {name!r}")
        if scheme[name].kind is not Kind.CATEGORICAL:
            raise InvalidBlend(f"{name!r} is not a categorical descriptor")
    if major == minor:
        raise InvalidBlend("major and minor categories must differ")
    problems = check_blend_weights(float(p), float(q))
    if problems:
        raise InvalidWeights("; ".join(problems))
    entries = {}
    for d in scheme.descriptors:
        if d.name == major:
            entries[d.name] = FiniteSupport(d, ((PRESENT, q),))
        elif d.name == minor:
            entries[d.name] = FiniteSupport(d, ((PRESENT, p),))
        else:
            entries[d.name] = PointMass(d, ABSENT)
    return EmotionRepresentation(scheme.name, entries)


MODE = "mode"
MEAN = "mean"


def _single(xi, policy):
    d = xi.descriptor
    if policy == MODE:
        return argmax_label(xi)[0]
    if d.kind is not Kind.NUMERICAL:
        raise PolicyUnsupported(f"mean policy is undefined on {d.kind.value} descriptor {d.name!r}")
    if isinstance(xi, PointMass):
        return xi.element
    return d.numeric_map.inverse(expected_value(xi))


def to_single_valued(rep: EmotionRepresentation, policy: str = MODE) -> dict:
    """Collapse every ambiguity function to one element.

    Returns ``{name: element}`` for time-constant entries and
    ``{name: [element, ...]}`` (one per timestamp) for time-varying ones.
    """
    if policy not in (MODE, MEAN):
        raise PolicyUnsupported(f"unknown policy {policy!r}")
    out = {}
    for name, entry in rep.per_descriptor.items():
        if isinstance(entry, TimeVaryingAmbiguity):
            out[name] = [_single(f, policy) for f in entry.functions]
        else:
            out[name] = _single(entry, policy)
    return out


def point_representation(rep: EmotionRepresentation, policy: str = MODE) -> EmotionRepresentation:
    """Same as :func:`to_single_valued` but packaged as point masses."""
    values = to_single_valued(rep, policy)
    entries = {}
    for name, entry in rep.per_descriptor.items():
        d = entry.descriptor
        if isinstance(entry, TimeVaryingAmbiguity):
            entries[name] = TimeVaryingAmbiguity(entry.times, tuple(PointMass(d, v) for v in values[name]))
        else:
            entries[name] = PointMass(d, values[name])
    return EmotionRepresentation(rep.scheme_ref, entries)


@dataclass(frozen=True)
class CentroidResult:
    centroids: dict
    assumptions: tuple[str, ...] = EUCLIDEAN_ASSUMPTIONS


def categorical_centroids(points: Iterable[tuple[str, Sequence[float]]], scheme: Scheme) -> CentroidResult:
    """Mean position of each categorical label in the scheme's numerical attribute space.

    Coordinates are passed through each numerical descriptor's numeric map
    before averaging.  Every categorical descriptor of the scheme must
    receive at least one point.
    """
    axes = scheme.of_kind(Kind.NUMERICAL)
    categories = [d.name for d in scheme.of_kind(Kind.CATEGORICAL)]
    grouped = defaultdict(list)
    for category, vector in points:
        if category not in categories:
            raise UnknownDescriptor(f"{category!r} is not a categorical descriptor of {scheme.name!r}")
        if len(vector) != len(axes):
            raise ValueError(f"expected {len(axes)} coordinates, got {len(vector)}")
        grouped[category].append([d.numeric_map(d.check(x)) for d, x in zip(axes, vector)])
    empty = [c for c in categories if not grouped[c]]
    if empty:
        raise EmptyCategory(f"no points for {', '.join(empty)}")
    return CentroidResult({c: tuple(np.mean(np.asarray(grouped[c]), axis=0).tolist()) for c in categories})


def representation_to_dict(rep: EmotionRepresentation) -> dict:
    return {"scheme": rep.scheme_ref, "descriptors": {n: to_dict(e) for n, e in rep.per_descriptor.items()}}


def representation_from_dict(data: Mapping, scheme: Scheme) -> EmotionRepresentation:
    if data["scheme"] != scheme.name:
        raise SchemeMismatch(f"file refers to scheme {data['scheme']!r}, not {scheme.name!r}")
    return EmotionRepresentation(
        data["scheme"], {n: from_dict(e, scheme) for n, e in data["descriptors"].items()}
    )

