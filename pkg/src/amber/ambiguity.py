"""Ambiguity functions: non-negative scores over the elements of one descriptor.

Five families are supported:

``PointMass``         indicator of a single element (the no-ambiguity case)
``FiniteSupport``     explicit weights over finitely many elements
``Gaussian``          normal density over a numerical descriptor
``GaussianMixture``   mixture of normal densities over a numerical descriptor
``BernoulliPair``     distribution over a two-outcome comparison space

Densities are parameterised in the descriptor's mapped coordinate (the
range of its numeric map); they are not truncated to the descriptor bounds.

For categorical descriptors a ``FiniteSupport`` may store only the PRESENT
weight; the ABSENT weight is then derived as ``1 - w(PRESENT)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Union

from .descriptors import (
    ABSENT,
    PRESENT,
    TOL,
    AttributeDescriptor,
    Kind,
    ordinal,
)
from .errors import DescriptorMismatch, DomainMismatch, GridMismatch, InvalidDescriptor, UnknownDescriptor, ZeroMass

SQRT2PI = math.sqrt(2.0 * math.pi)

#: Density mass outside the descriptor interval above which a warning is emitted.
BOUNDARY_MASS_WARN = 0.05

HIGHER = "HIGHER"
LOWER = "LOWER"
SAME = "SAME"

#: Two-outcome space used by ``BernoulliPair`` for pairwise comparisons.
COMPARISON = ordinal("comparison", (HIGHER, LOWER))


class BoundaryMassWarning(UserWarning):
    """A density places noticeable mass outside its descriptor's interval."""


def normal_pdf(x: float, mean: float, sd: float) -> float:
    z = (x - mean) / sd
    return math.exp(-0.5 * z * z) / (sd * SQRT2PI)


def normal_cdf(x: float, mean: float, sd: float) -> float:
    return 0.5 * (1.0 + math.erf((x - mean) / (sd * math.sqrt(2.0))))


def _require_numerical(descriptor, variant):
    if descriptor.kind is not Kind.NUMERICAL:
        raise DomainMismatch(f"{variant} is only defined over numerical descriptors, not {descriptor.name!r}")


def _warn_boundary(descriptor, components):
    a, b = descriptor.numeric_map.target
    inside = sum(w * (normal_cdf(b, m, s) - normal_cdf(a, m, s)) for w, m, s in components)
    outside = 1.0 - inside
    if outside > BOUNDARY_MASS_WARN:
        warnings.warn(
            f"{outside:.1%} of the density over {descriptor.name!r} lies outside [{a}, {b}]",
            BoundaryMassWarning,
            stacklevel=4,
        )


@dataclass(frozen=True)
class PointMass:
    descriptor: AttributeDescriptor
    element: Union[str, float]

    def __post_init__(self):
        object.__setattr__(self, "element", self.descriptor.check(self.element))


@dataclass(frozen=True)
class FiniteSupport:
    """Weights over a finite set of elements, stored in descriptor order."""

    descriptor: AttributeDescriptor
    weights: tuple

    def __post_init__(self):
        items = self.weights.items() if isinstance(self.weights, Mapping) else self.weights
        seen = {}
        for element, w in items:
            element = self.descriptor.check(element)
            w = float(w)
            if not (math.isfinite(w) and w >= 0):
                raise ValueError(f"weight for {element!r} must be finite and non-negative, got {w!r}")
            if element in seen:
                raise ValueError(f"duplicate element {element!r}")
            seen[element] = w
        if not seen:
            raise ValueError("FiniteSupport needs at least one element")
        ordered = tuple(sorted(seen.items(), key=lambda kv: self.descriptor.rank(kv[0])))
        object.__setattr__(self, "weights", ordered)

    def as_dict(self) -> dict:
        return dict(self.weights)


@dataclass(frozen=True)
class Gaussian:
    descriptor: AttributeDescriptor
    mean: float
    sd: float

    def __post_init__(self):
        _require_numerical(self.descriptor, "Gaussian")
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "sd", float(self.sd))
        if not math.isfinite(self.mean):
            raise ValueError("Gaussian mean must be finite")
        if not (math.isfinite(self.sd) and self.sd > 0):
            raise ValueError(f"Gaussian sd must be positive, got {self.sd!r}")
        _warn_boundary(self.descriptor, [(1.0, self.mean, self.sd)])


@dataclass(frozen=True)
class GaussianMixture:
    """Mixture components as ``(weight, mean, sd)`` triples."""

    descriptor: AttributeDescriptor
    components: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        _require_numerical(self.descriptor, "GaussianMixture")
        comps = tuple((float(w), float(m), float(s)) for w, m, s in self.components)
        if not comps:
            raise ValueError("GaussianMixture needs at least one component")
        for w, m, s in comps:
            if not (math.isfinite(w) and w >= 0):
                raise ValueError(f"mixture weight must be non-negative, got {w!r}")
            if not math.isfinite(m):
                raise ValueError("mixture mean must be finite")
            if not (math.isfinite(s) and s > 0):
                raise ValueError(f"mixture sd must be positive, got {s!r}")
        total = math.fsum(w for w, _, _ in comps)
        if abs(total - 1.0) > TOL:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", comps)
        _warn_boundary(self.descriptor, comps)


@dataclass(frozen=True)
class BernoulliPair:
    """Probability ``p_first`` on the first level of a two-level space, the rest on the second."""

    descriptor: AttributeDescriptor = COMPARISON
    p_first: float = 0.5

    def __post_init__(self):
        if not self.descriptor.is_finite or len(self.descriptor.levels) != 2:
            raise DomainMismatch("BernoulliPair needs a two-outcome descriptor")
        p = float(self.p_first)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p_first must lie in [0, 1], got {p!r}")
        object.__setattr__(self, "p_first", p)


AmbiguityFunction = Union[PointMass, FiniteSupport, Gaussian, GaussianMixture, BernoulliPair]
DENSITY_VARIANTS = (Gaussian, GaussianMixture)
FINITE_VARIANTS = (PointMass, FiniteSupport, BernoulliPair)


@dataclass(frozen=True)
class TimeVaryingAmbiguity:
    times: tuple[float, ...]
    functions: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        functions = tuple(self.functions)
        if len(times) != len(functions):
            raise GridMismatch(f"{len(times)} timestamps but {len(functions)} functions")
        if not times:
            raise GridMismatch("a time-varying ambiguity needs at least one timestamp")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise GridMismatch("timestamps must be strictly increasing")
        names = {f.descriptor for f in functions}
        if len(names) != 1:
            raise DescriptorMismatch("all functions must share one descriptor")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "functions", functions)

    @property
    def descriptor(self) -> AttributeDescriptor:
        return self.functions[0].descriptor

    def at(self, t: float):
        for s, f in zip(self.times, self.functions):
            if abs(s - t) <= TOL:
                return f
        raise KeyError(t)

    def __len__(self):
        return len(self.times)


def _mapped(descriptor, x) -> float:
    return descriptor.numeric_map(descriptor.check(x))


def masses(xi) -> dict:
    """Explicit element -> weight table for finite-valued functions.

    Fills in the derived ABSENT weight for categorical descriptors.
    """
    if isinstance(xi, PointMass):
        table = {xi.element: 1.0}
        if xi.descriptor.kind is Kind.CATEGORICAL:
            other = ABSENT if xi.element == PRESENT else PRESENT
            table[other] = 0.0
        return table
    if isinstance(xi, FiniteSupport):
        table = xi.as_dict()
        if xi.descriptor.kind is Kind.CATEGORICAL and ABSENT not in table and PRESENT in table:
            table = {ABSENT: max(0.0, 1.0 - table[PRESENT]), PRESENT: table[PRESENT]}
        return table
    if isinstance(xi, BernoulliPair):
        first, second = xi.descriptor.levels
        return {first: xi.p_first, second: 1.0 - xi.p_first}
    raise TypeError(f"{type(xi).__name__} has no finite mass table")


def mixture_components(xi) -> tuple[tuple[float, float, float], ...]:
    if isinstance(xi, Gaussian):
        return ((1.0, xi.mean, xi.sd),)
    if isinstance(xi, GaussianMixture):
        return xi.components
    raise TypeError(f"{type(xi).__name__} is not a density")


def mixture_pdf(components, y: float) -> float:
    return math.fsum(w * normal_pdf(y, m, s) for w, m, s in components)


def evaluate(xi, x) -> float:
    """Value of the ambiguity function at element ``x``."""
    d = xi.descriptor
    x = d.check(x)
    if isinstance(xi, DENSITY_VARIANTS):
        return mixture_pdf(mixture_components(xi), d.numeric_map(x))
    return masses(xi).get(x, 0.0)


def total_mass(xi) -> float:
    if isinstance(xi, DENSITY_VARIANTS):
        return 1.0
    return math.fsum(masses(xi).values())


def normalize(xi):
    """Rescale finite weights to sum to one; densities and point masses are returned as is."""
    if isinstance(xi, FiniteSupport):
        table = masses(xi)
        total = math.fsum(table.values())
        if total <= 0:
            raise ZeroMass(f"all weights over {xi.descriptor.name!r} are zero")
        if len(table) == len(xi.weights) and abs(total - 1.0) <= 4e-16:
            return xi
        return FiniteSupport(xi.descriptor, tuple((e, w / total) for e, w in table.items()))
    return xi


def from_point_label(descriptor: AttributeDescriptor, x) -> PointMass:
    return PointMass(descriptor, descriptor.check(x))


def _mixture_modes(components, lo, hi) -> list[float]:
    """Local maxima of a 1-D Gaussian mixture inside ``[lo, hi]`` plus both endpoints.

    Each component mean seeds a mean-shift fixed-point iteration, which
    climbs monotonically to a local mode.
    """
    candidates = [lo, hi]
    for _, start, _ in components:
        y = start
        for _ in range(1000):
            num = den = 0.0
            for w, m, s in components:
                k = w * normal_pdf(y, m, s) / (s * s)
                num += k * m
                den += k
            if den == 0.0:
                break
            y_new = num / den
            if abs(y_new - y) < 1e-13:
                y = y_new
                break
            y = y_new
        if lo <= y <= hi:
            candidates.append(y)
    return candidates


def argmax_label(xi):
    """Most strongly represented element and whether the maximum is shared.

    Ties (within ``TOL``) resolve to the element that comes first in the
    descriptor order.
    """
    d = xi.descriptor
    if isinstance(xi, PointMass):
        return xi.element, False
    if isinstance(xi, DENSITY_VARIANTS):
        comps = mixture_components(xi)
        a, b = d.numeric_map.target
        candidates = sorted(set(_mixture_modes(comps, a, b)))
        scored = [(y, mixture_pdf(comps, y)) for y in candidates]
        best = max(v for _, v in scored)
        winners = [y for y, v in scored if best - v <= TOL]
        distinct = [winners[0]]
        for y in winners[1:]:
            if y - distinct[-1] > 1e-6:
                distinct.append(y)
        element = min(max(d.numeric_map.inverse(distinct[0]), d.bounds[0]), d.bounds[1])
        return element, len(distinct) > 1
    table = masses(xi)
    if d.kind is Kind.NUMERICAL:
        order = sorted(table, key=float)
    else:
        order = list(d.levels)
    values = [(e, table.get(e, 0.0)) for e in order]
    best = max(v for _, v in values)
    winners = [e for e, v in values if best - v <= TOL]
    return winners[0], len(winners) > 1


def expected_value(xi) -> float:
    """Mean in the mapped coordinate, treating the normalised function as a probability."""
    d = xi.descriptor
    if d.numeric_map is None:
        raise DomainMismatch(f"descriptor {d.name!r} has no numeric structure")
    if isinstance(xi, DENSITY_VARIANTS):
        return math.fsum(w * m for w, m, _ in mixture_components(xi))
    table = masses(normalize(xi))
    return math.fsum(w * d.numeric_map(e) for e, w in table.items())


# ---------------------------------------------------------------------------
# JSON-compatible dictionaries
# ---------------------------------------------------------------------------


def to_dict(xi) -> dict:
    if isinstance(xi, TimeVaryingAmbiguity):
        return {"times": list(xi.times), "functions": [to_dict(f) for f in xi.functions]}
    out = {"variant": type(xi).__name__, "descriptor": xi.descriptor.name}
    if isinstance(xi, PointMass):
        out["element"] = xi.element
    elif isinstance(xi, FiniteSupport):
        out["weights"] = [[e, w] for e, w in xi.weights]
    elif isinstance(xi, Gaussian):
        out["mean"] = xi.mean
        out["sd"] = xi.sd
    elif isinstance(xi, GaussianMixture):
        out["components"] = [list(c) for c in xi.components]
    elif isinstance(xi, BernoulliPair):
        out["outcomes"] = list(xi.descriptor.levels)
        out["p_first"] = xi.p_first
    else:
        raise TypeError(f"cannot serialise {type(xi).__name__}")
    return out


_FIELDS = {
    "PointMass": {"element"},
    "FiniteSupport": {"weights"},
    "Gaussian": {"mean", "sd"},
    "GaussianMixture": {"components"},
    "BernoulliPair": {"outcomes", "p_first"},
}


def from_dict(data: Mapping, descriptors):
    """Inverse of :func:`to_dict`.

    ``descriptors`` is a Scheme or any mapping from descriptor name to
    :class:`AttributeDescriptor`.
    """
    if "times" in data:
        extra = set(data) - {"times", "functions"}
        if extra:
            raise ValueError(f"unknown fields {sorted(extra)}")
        return TimeVaryingAmbiguity(
            tuple(data["times"]), tuple(from_dict(f, descriptors) for f in data["functions"])
        )
    variant = data.get("variant")
    if variant not in _FIELDS:
        raise ValueError(f"unknown ambiguity variant {variant!r}")
    extra = set(data) - _FIELDS[variant] - {"variant", "descriptor"}
    if extra:
        raise ValueError(f"unknown fields {sorted(extra)} for {variant}")
    name = data["descriptor"]
    if variant == "BernoulliPair":
        outcomes = tuple(data["outcomes"])
        if outcomes == COMPARISON.levels and name == COMPARISON.name:
            d = COMPARISON
        else:
            try:
                d = descriptors[name]
            except (KeyError, UnknownDescriptor):
                d = ordinal(name, outcomes)
            if d.levels != outcomes:
                raise InvalidDescriptor(f"outcomes {outcomes} do not match descriptor {name!r}")
        return BernoulliPair(d, data["p_first"])
    try:
        d = descriptors[name]
    except KeyError as exc:
        raise UnknownDescriptor(f"no descriptor named {name!r}") from exc
    if variant == "PointMass":
        return PointMass(d, data["element"])
    if variant == "FiniteSupport":
        return FiniteSupport(d, tuple((e, w) for e, w in data["weights"]))
    if variant == "Gaussian":
        return Gaussian(d, data["mean"], data["sd"])
    return GaussianMixture(d, tuple(tuple(c) for c in data["components"]))

