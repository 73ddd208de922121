import logging
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amber.descriptors import (
    ABSENT,
    EUCLIDEAN_ASSUMPTIONS,
    MUTUALLY_EXCLUSIVE,
    PRESENT,
    AffineMap,
    AttributeDescriptor,
    Constraint,
    Kind,
    Scheme,
    TableMap,
    attach_numeric_map,
    categorical,
    distance,
    euclidean_distance,
    map_to_numeric,
    numerical,
    ordinal,
    validate_descriptor,
)
from amber.errors import DomainMismatch, InvalidDescriptor, InvalidScheme, NoNumericStructure, UnknownDescriptor
from amber.formats import scheme_from_dict, scheme_to_dict


def test_categorical_descriptor_is_valid():
    d = AttributeDescriptor("Happy", Kind.CATEGORICAL, (ABSENT, PRESENT))
    assert validate_descriptor(d).valid


def test_single_level_ordinal_is_reported():
    report = validate_descriptor(AttributeDescriptor("x", Kind.ORDINAL, ("only",)))
    assert "fewer than 2 levels" in report.violations


def test_reversed_bounds_are_reported():
    d = AttributeDescriptor("v", Kind.NUMERICAL, (), (1.0, -1.0), AffineMap((1.0, -1.0)))
    assert "alpha does not precede beta" in validate_descriptor(d).violations


def test_report_lists_every_problem():
    d = AttributeDescriptor("", Kind.ORDINAL, ("a", "a"), (0.0, 1.0))
    v = validate_descriptor(d).violations
    assert "empty name" in v
    assert "duplicate levels" in v
    assert "bounds only apply to numerical descriptors" in v


@pytest.mark.parametrize(
    "d, message",
    [
        (AttributeDescriptor("c", Kind.CATEGORICAL, ("no", "yes")), "categorical levels"),
        (AttributeDescriptor("v", Kind.NUMERICAL, (), None, None), "without bounds"),
        (AttributeDescriptor("v", Kind.NUMERICAL, ("a",), (0.0, 1.0), AffineMap((0.0, 1.0))), "have no levels"),
        (AttributeDescriptor("v", Kind.NUMERICAL, (), (0.0, 1.0), AffineMap((0.0, 2.0))), "source differs"),
        (AttributeDescriptor("v", Kind.NUMERICAL, (), (0.0, 1.0), AffineMap((0.0, 1.0), (1.0, 0.0))), "not increasing"),
        (AttributeDescriptor("o", Kind.ORDINAL, ("a", "b"), None, TableMap((("a", 1.0), ("b", 0.0)))), "strictly increasing"),
        (AttributeDescriptor("o", Kind.ORDINAL, ("a", "b"), None, TableMap((("a", 1.0),))), "every level"),
    ],
)
def test_structural_violations(d, message):
    report = validate_descriptor(d)
    assert not report.valid
    assert any(message in v for v in report.violations)


def test_factories_raise_on_invalid():
    with pytest.raises(InvalidDescriptor):
        ordinal("x", ("a",))
    with pytest.raises(InvalidDescriptor):
        numerical("v", bounds=(1, -1))


def test_numerical_defaults_to_identity_on_unit_interval():
    d = numerical("valence")
    assert d.bounds == (-1.0, 1.0)
    assert d.numeric_map.is_identity


def test_ordinal_has_no_numeric_map(likert):
    assert likert.numeric_map is None


def test_identity_map():
    assert map_to_numeric(numerical("valence"), 0.25) == 0.25


def test_ordinal_without_map_has_no_numeric_structure():
    d = ordinal("level", ("very low", "low", "medium", "high", "very high"))
    with pytest.raises(NoNumericStructure):
        map_to_numeric(d, "medium")
    with pytest.raises(NoNumericStructure):
        distance(d, "low", "high")


def test_attached_table_map(likert, caplog):
    with caplog.at_level(logging.WARNING, logger="amber.descriptors"):
        d = attach_numeric_map(likert, {"low": -1, "medium": 0, "high": 1})
    assert map_to_numeric(d, "high") == 1.0
    assert "numeric map attached" in caplog.text
    assert likert.numeric_map is None


def test_attach_rejects_non_monotone_map(likert):
    with pytest.raises(InvalidDescriptor):
        attach_numeric_map(likert, {"low": 0, "medium": -1, "high": 1})


def test_map_rejects_foreign_element(valence):
    with pytest.raises(DomainMismatch):
        map_to_numeric(valence, 1.5)


def test_affine_map_onto_other_interval():
    d = numerical("rating", bounds=(1, 9), interval=(-1, 1))
    assert map_to_numeric(d, 1) == -1.0
    assert map_to_numeric(d, 5) == 0.0
    assert map_to_numeric(d, 9) == 1.0
    assert d.numeric_map.inverse(0.5) == 7.0


def test_distance_examples(valence, likert):
    assert distance(valence, 0.3, -0.2) == pytest.approx(0.5, abs=1e-12)
    assert distance(valence, 0.7, 0.7) == 0.0
    d = attach_numeric_map(likert, {"low": -1, "medium": 0, "high": 1})
    assert distance(d, "low", "high") == 2.0
    assert distance(d, "low", "high") == distance(d, "low", "medium") + distance(d, "medium", "high")


def test_distance_quantisation_is_below_tolerance(valence):
    for x, y in [(0.3, -0.2), (0.1, 0.2), (-0.999, 0.999)]:
        assert abs(distance(valence, x, y) - abs(y - x)) < 1e-11


def _exact(x):
    return Fraction(x)


descriptors = st.sampled_from(
    [numerical("valence"), numerical("rating", (1, 9), (-1, 1)), numerical("hr", (40, 180), (0, 1000))]
)


@st.composite
def triples(draw):
    d = draw(descriptors)
    lo, hi = d.bounds
    x = st.floats(lo, hi, allow_nan=False)
    return d, draw(x), draw(x), draw(x)


@settings(max_examples=300)
@given(triples())
def test_metric_axioms_hold_exactly(args):
    d, x, y, z = args
    dxy, dyx, dyz, dxz = distance(d, x, y), distance(d, y, x), distance(d, y, z), distance(d, x, z)
    assert dxy >= 0
    assert dxy == dyx
    assert distance(d, x, x) == 0
    assert (dxy == 0) == (map_to_numeric(d, x) == map_to_numeric(d, y)) or dxy < 1e-11
    assert _exact(dxz) <= _exact(dxy) + _exact(dyz)
    assert dxz <= dxy + dyz


@given(triples())
def test_map_is_order_preserving(args):
    d, x, y, _ = args
    lo, hi = sorted((x, y))
    assert map_to_numeric(d, lo) <= map_to_numeric(d, hi)


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=6, unique=True))
def test_table_map_order_preserving(values):
    values = sorted(values)
    levels = [f"l{k}" for k in range(len(values))]
    d = attach_numeric_map(ordinal("o", levels), dict(zip(levels, values)))
    mapped = [map_to_numeric(d, level) for level in levels]
    assert mapped == sorted(mapped)


def test_scheme_requires_unique_names():
    with pytest.raises(InvalidScheme, match="unique"):
        Scheme("s", (categorical("A"), categorical("A")))


def test_exclusive_constraint_needs_categorical_descriptors():
    with pytest.raises(InvalidScheme, match="categorical"):
        Scheme("s", (categorical("A"), numerical("v")), MUTUALLY_EXCLUSIVE)


@pytest.mark.parametrize("p, q", [(0.6, 0.4), (0.5, 0.5), (0.3, 0.6), (0.0, 1.0), (-0.1, 1.1)])
def test_blended_constraint_needs_valid_weights(p, q):
    with pytest.raises(InvalidScheme):
        Scheme("s", (categorical("A"), categorical("B")), Constraint.blended(p, q))


def test_scheme_lookup():
    s = Scheme("s", (categorical("A"), numerical("v")))
    assert s["v"].kind is Kind.NUMERICAL
    assert "A" in s and "Z" not in s
    with pytest.raises(UnknownDescriptor):
        s["Z"]
    with pytest.raises(KeyError):
        s["Z"]


@st.composite
def schemes(draw):
    n = draw(st.integers(1, 5))
    names = draw(st.lists(st.text("abcdefgh", min_size=1, max_size=6), min_size=n, max_size=n, unique=True))
    descs = []
    for name in names:
        kind = draw(st.sampled_from(list(Kind)))
        if kind is Kind.CATEGORICAL:
            descs.append(categorical(name))
        elif kind is Kind.ORDINAL:
            k = draw(st.integers(2, 6))
            d = ordinal(name, [f"L{i}" for i in range(k)])
            if draw(st.booleans()):
                vals = sorted(draw(st.lists(st.floats(-1e6, 1e6), min_size=k, max_size=k, unique=True)))
                d = attach_numeric_map(d, {f"L{i}": v for i, v in enumerate(vals)})
            descs.append(d)
        else:
            lo = draw(st.floats(-1e6, 1e6))
            hi = draw(st.floats(-1e6, 1e6).filter(lambda h: h > lo))
            a = draw(st.floats(-10, 10))
            b = draw(st.floats(-10, 10).filter(lambda v: v > a))
            descs.append(numerical(name, (lo, hi), draw(st.sampled_from([None, (a, b)]))))
    time_constant = draw(st.booleans())
    if all(d.kind is Kind.CATEGORICAL for d in descs) and draw(st.booleans()):
        return Scheme("s", tuple(descs), MUTUALLY_EXCLUSIVE, time_constant)
    return Scheme("s", tuple(descs), Constraint(), time_constant)


@given(schemes())
def test_scheme_round_trips_bit_exactly(scheme):
    data = scheme_to_dict(scheme)
    back = scheme_from_dict(data)
    assert back == scheme
    assert scheme_to_dict(back) == data


def test_euclidean_distance_states_assumptions():
    s = Scheme("circumplex", (numerical("valence"), numerical("arousal"), categorical("Happy")))
    r = euclidean_distance(s, {"valence": 0.0, "arousal": 0.0}, {"valence": 0.3, "arousal": 0.4})
    assert r.value == pytest.approx(0.5, abs=1e-12)
    assert r.assumptions == EUCLIDEAN_ASSUMPTIONS
    assert any("orthogonal" in a for a in r.assumptions)


def test_descriptors_are_immutable(valence):
    with pytest.raises(AttributeError):
        valence.name = "x"
    assert math.isclose(valence.rank(0.5), 0.5)
