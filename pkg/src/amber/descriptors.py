"""Attribute descriptors: the ordered label spaces an emotion is described on.

A descriptor is one of three kinds:

* categorical -- the two-element set ``(ABSENT, PRESENT)`` for one emotion category;
* numerical   -- a closed real interval ``[alpha, beta]`` mapped affinely onto ``[a, b]``;
* ordinal     -- a finite list of levels ordered low to high, with no distance.

Numeric structure is only ever available through an explicit ``numeric_map``.
Ordinal descriptors do not get one unless :func:`attach_numeric_map` is called,
because equidistant levels are an assumption, not a property of the scale.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .errors import DomainMismatch, InvalidDescriptor, InvalidScheme, NoNumericStructure, UnknownDescriptor

logger = logging.getLogger(__name__)

ABSENT = "ABSENT"
PRESENT = "PRESENT"

#: Tolerance for proximity checks on real-valued elements.
TOL = 1e-9

Element = Union[str, float]


class Kind(str, enum.Enum):
    CATEGORICAL = "categorical"
    NUMERICAL = "numerical"
    ORDINAL = "ordinal"


@dataclass(frozen=True)
class AffineMap:
    """Strictly increasing affine map from ``source`` onto ``target``."""

    source: tuple[float, float]
    target: tuple[float, float] = (-1.0, 1.0)

    @property
    def is_identity(self) -> bool:
        return tuple(self.source) == tuple(self.target)

    def __call__(self, x: float) -> float:
        x = float(x)
        if self.is_identity:
            return x
        lo, hi = self.source
        a, b = self.target
        return a + (x - lo) * (b - a) / (hi - lo)

    def inverse(self, y: float) -> float:
        y = float(y)
        if self.is_identity:
            return y
        lo, hi = self.source
        a, b = self.target
        return lo + (y - a) * (hi - lo) / (b - a)


@dataclass(frozen=True)
class TableMap:
    """Lookup table from finite levels to reals, stored as ``(level, value)`` pairs."""

    values: tuple[tuple[str, float], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float]) -> "TableMap":
        return cls(tuple((str(k), float(v)) for k, v in mapping.items()))

    def as_dict(self) -> dict[str, float]:
        return dict(self.values)

    def __call__(self, x: str) -> float:
        table = self.as_dict()
        if x not in table:
            raise DomainMismatch(f"{x!r} has no entry in the numeric map")
        return table[x]

    @property
    def target(self) -> tuple[float, float]:
        vals = [v for _, v in self.values]
        return (min(vals), max(vals))


NumericMap = Union[AffineMap, TableMap]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a structural check; no violations means valid."""

    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.violations + other.violations, self.warnings + other.warnings)


@dataclass(frozen=True)
class AttributeDescriptor:
    """One ordered label set.

    Construction does not validate, so that malformed descriptors read from
    files can be reported on by :func:`validate_descriptor`.  Use the
    :func:`categorical`, :func:`numerical` and :func:`ordinal` factories to
    get validated instances.
    """

    name: str
    kind: Kind
    levels: tuple[str, ...] = ()
    bounds: tuple[float, float] | None = None
    numeric_map: NumericMap | None = None

    @property
    def is_finite(self) -> bool:
        return self.kind is not Kind.NUMERICAL

    def contains(self, x) -> bool:
        if self.kind is Kind.NUMERICAL:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                return False
            x = float(x)
            lo, hi = self.bounds
            return math.isfinite(x) and lo <= x <= hi
        return isinstance(x, str) and x in self.levels

    def check(self, x) -> Element:
        """Return ``x`` normalised to the descriptor's element type, or raise DomainMismatch."""
        if not self.contains(x):
            raise DomainMismatch(f"{x!r} is not an element of descriptor {self.name!r}")
        return float(x) if self.kind is Kind.NUMERICAL else x

    def rank(self, x) -> float:
        """Position of ``x`` in the set order (the value itself for numerical descriptors)."""
        x = self.check(x)
        if self.kind is Kind.NUMERICAL:
            return x
        return float(self.levels.index(x))


def validate_descriptor(d: AttributeDescriptor) -> ValidationReport:
    """List every structural problem with ``d``."""
    v = []
    if not d.name:
        v.append("empty name")
    if len(set(d.levels)) != len(d.levels):
        v.append("duplicate levels")
    if d.kind is Kind.CATEGORICAL:
        if tuple(d.levels) != (ABSENT, PRESENT):
            v.append(f"categorical levels must be exactly ({ABSENT}, {PRESENT})")
        if d.bounds is not None:
            v.append("bounds only apply to numerical descriptors")
    elif d.kind is Kind.ORDINAL:
        if len(d.levels) < 2:
            v.append("fewer than 2 levels")
        if d.bounds is not None:
            v.append("bounds only apply to numerical descriptors")
    elif d.kind is Kind.NUMERICAL:
        if d.levels:
            v.append("numerical descriptors have no levels")
        if d.bounds is None:
            v.append("numerical descriptor without bounds")
        else:
            lo, hi = d.bounds
            if not (math.isfinite(lo) and math.isfinite(hi)):
                v.append("bounds must be finite")
            elif not lo < hi:
                v.append("alpha does not precede beta")
        if d.numeric_map is None:
            v.append("numerical descriptor without numeric map")
    else:  # pragma: no cover - Kind is closed
        v.append(f"unknown kind {d.kind!r}")

    m = d.numeric_map
    if m is not None:
        if d.kind is Kind.NUMERICAL:
            if not isinstance(m, AffineMap):
                v.append("numerical descriptors need an identity or affine numeric map")
            else:
                if d.bounds is not None and tuple(m.source) != tuple(d.bounds):
                    v.append("numeric map source differs from bounds")
                a, b = m.target
                if not a < b:
                    v.append("numeric map target interval is not increasing")
        else:
            if not isinstance(m, TableMap):
                v.append("finite descriptors need a table numeric map")
            else:
                keys = [k for k, _ in m.values]
                if sorted(keys, key=_safe_index(d.levels)) != list(d.levels) or len(keys) != len(d.levels):
                    v.append("numeric map must cover every level exactly once")
                else:
                    table = m.as_dict()
                    vals = [table[level] for level in d.levels]
                    if not all(math.isfinite(x) for x in vals):
                        v.append("numeric map values must be finite")
                    elif any(b <= a for a, b in zip(vals, vals[1:])):
                        v.append("numeric map is not strictly increasing in level order")
    return ValidationReport(tuple(v))


def _safe_index(levels):
    def key(k):
        return levels.index(k) if k in levels else len(levels)
    return key


def _raise_if_invalid(d: AttributeDescriptor) -> AttributeDescriptor:
    report = validate_descriptor(d)
    if not report.valid:
        raise InvalidDescriptor(f"{d.name!r}: " + "; ".join(report.violations))
    return d


def categorical(name: str) -> AttributeDescriptor:
    return _raise_if_invalid(AttributeDescriptor(name, Kind.CATEGORICAL, (ABSENT, PRESENT)))


def numerical(name: str, bounds=(-1.0, 1.0), interval=None) -> AttributeDescriptor:
    """Numerical descriptor on ``bounds``, mapped affinely onto ``interval``.

    ``interval`` defaults to ``bounds`` (identity map).
    """
    bounds = (float(bounds[0]), float(bounds[1]))
    target = bounds if interval is None else (float(interval[0]), float(interval[1]))
    return _raise_if_invalid(AttributeDescriptor(name, Kind.NUMERICAL, (), bounds, AffineMap(bounds, target)))


def ordinal(name: str, levels: Sequence[str]) -> AttributeDescriptor:
    return _raise_if_invalid(AttributeDescriptor(name, Kind.ORDINAL, tuple(levels)))


def attach_numeric_map(d: AttributeDescriptor, mapping: Mapping[str, float]) -> AttributeDescriptor:
    """Return a copy of finite descriptor ``d`` carrying a user-supplied numeric map.

    This is the only way an ordinal scale acquires distances.  The call is
    logged so that the assumption shows up in pipeline logs.
    """
    if not d.is_finite:
        raise InvalidDescriptor("numerical descriptors already carry an affine map")
    out = AttributeDescriptor(d.name, d.kind, d.levels, d.bounds, TableMap.from_mapping(mapping))
    _raise_if_invalid(out)
    logger.warning("numeric map attached to %s descriptor %r: %s", d.kind.value, d.name, dict(mapping))
    return out


def map_to_numeric(d: AttributeDescriptor, x) -> float:
    if d.numeric_map is None:
        raise NoNumericStructure(
            f"descriptor {d.name!r} ({d.kind.value}) has no numeric map; attach one explicitly"
        )
    return d.numeric_map(d.check(x))


#: Fixed-point resolution of distances, in bits below the mapped interval's magnitude.
DISTANCE_BITS = 40


def _distance_quantum(m: NumericMap) -> float:
    a, b = m.target
    span = max(abs(a), abs(b), 1.0)
    return 2.0 ** (math.ceil(math.log2(span)) - DISTANCE_BITS)


def distance(d: AttributeDescriptor, x_i, x_j) -> float:
    """Absolute difference of the mapped values.

    Mapped values are snapped to a grid of ``2**-40`` times the interval
    magnitude first.  Differences and sums of grid values are exact in
    double precision, so the result is a metric with no rounding exceptions
    (symmetry, identity and the triangle inequality hold bit for bit).
    """
    u, w = map_to_numeric(d, x_i), map_to_numeric(d, x_j)
    step = _distance_quantum(d.numeric_map)
    return abs(round(w / step) - round(u / step)) * step


class ConstraintKind(str, enum.Enum):
    NONE = "none"
    MUTUALLY_EXCLUSIVE = "mutually_exclusive"
    BLENDED = "blended"


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind = ConstraintKind.NONE
    p: float | None = None
    q: float | None = None

    @classmethod
    def blended(cls, p: float, q: float) -> "Constraint":
        return cls(ConstraintKind.BLENDED, float(p), float(q))


NO_CONSTRAINT = Constraint()
MUTUALLY_EXCLUSIVE = Constraint(ConstraintKind.MUTUALLY_EXCLUSIVE)


def check_blend_weights(p: float, q: float) -> list[str]:
    problems = []
    if not 0 < p < q:
        problems.append(f"need 0 < p < q, got p={p!r}, q={q!r}")
    if abs(p + q - 1.0) > TOL:
        problems.append(f"p + q must equal 1, got {p + q!r}")
    return problems


@dataclass(frozen=True)
class Scheme:
    """An ordered collection of descriptors plus a cross-descriptor constraint.

    ``time_constant`` marks schemes whose labels hold for a whole interval
    (each descriptor must then carry a single function, not a time series).
    """

    name: str
    descriptors: tuple[AttributeDescriptor, ...]
    constraint: Constraint = field(default=NO_CONSTRAINT)
    time_constant: bool = False

    def __post_init__(self):
        object.__setattr__(self, "descriptors", tuple(self.descriptors))
        problems = []
        names = [d.name for d in self.descriptors]
        if len(set(names)) != len(names):
            problems.append("descriptor names are not unique")
        for d in self.descriptors:
            problems.extend(f"{d.name}: {v}" for v in validate_descriptor(d).violations)
        c = self.constraint
        if c.kind is not ConstraintKind.NONE:
            if any(d.kind is not Kind.CATEGORICAL for d in self.descriptors):
                problems.append(f"{c.kind.value} constraint requires every descriptor to be categorical")
        if c.kind is ConstraintKind.BLENDED:
            if c.p is None or c.q is None:
                problems.append("blended constraint needs p and q")
            else:
                problems.extend(check_blend_weights(c.p, c.q))
        if problems:
            raise InvalidScheme(f"scheme {self.name!r}: " + "; ".join(problems))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.descriptors)

    def __getitem__(self, name: str) -> AttributeDescriptor:
        for d in self.descriptors:
            if d.name == name:
                return d
        raise UnknownDescriptor(f"scheme {self.name!r} has no descriptor {name!r}")

    def __contains__(self, name) -> bool:
        return name in self.names

    def of_kind(self, kind: Kind) -> tuple[AttributeDescriptor, ...]:
        return tuple(d for d in self.descriptors if d.kind is kind)


EUCLIDEAN_ASSUMPTIONS = (
    "distance between attribute vectors is Euclidean",
    "numerical attribute axes are treated as mutually orthogonal",
    "each axis uses its descriptor's numeric map as the coordinate",
)


@dataclass(frozen=True)
class MultiAttributeDistance:
    value: float
    assumptions: tuple[str, ...] = EUCLIDEAN_ASSUMPTIONS


def euclidean_distance(scheme: Scheme, a: Mapping[str, float], b: Mapping[str, float]) -> MultiAttributeDistance:
    """Distance between two points over all numerical descriptors of ``scheme``.

    The result carries the assumptions this metric makes explicit.
    """
    dims = scheme.of_kind(Kind.NUMERICAL)
    if not dims:
        raise NoNumericStructure(f"scheme {scheme.name!r} has no numerical descriptors")
    total = math.fsum(distance(d, a[d.name], b[d.name]) ** 2 for d in dims)
    return MultiAttributeDistance(math.sqrt(total))
