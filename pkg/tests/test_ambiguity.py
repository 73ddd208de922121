import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from amber.ambiguity import (
    COMPARISON,
    HIGHER,
    LOWER,
    BernoulliPair,
    BoundaryMassWarning,
    FiniteSupport,
    Gaussian,
    GaussianMixture,
    PointMass,
    TimeVaryingAmbiguity,
    argmax_label,
    evaluate,
    expected_value,
    from_dict,
    from_point_label,
    masses,
    normalize,
    to_dict,
)
from amber.descriptors import ABSENT, PRESENT, categorical, numerical, ordinal
from amber.errors import DescriptorMismatch, DomainMismatch, GridMismatch, ZeroMass

EMOTION = ordinal("emotion", ("Angry", "Happy", "Sad"))
AB = ordinal("ab", ("A", "B"))
HAPPY = categorical("Happy")
VALENCE = numerical("valence")


def test_point_mass_is_an_indicator():
    xi = PointMass(HAPPY, PRESENT)
    assert evaluate(xi, PRESENT) == 1.0
    assert evaluate(xi, ABSENT) == 0.0


def test_finite_support_lookup():
    xi = FiniteSupport(EMOTION, {"Angry": 0.5, "Happy": 0.5})
    assert evaluate(xi, "Angry") == 0.5
    assert evaluate(xi, "Sad") == 0.0


def test_gaussian_density_matches_reference():
    oracle = stats.norm(0, 1).pdf(0)
    assert evaluate(Gaussian(VALENCE, 0, 1), 0.0) == pytest.approx(0.39894, abs=1e-5)
    assert evaluate(Gaussian(VALENCE, 0, 1), 0.0) == pytest.approx(oracle, abs=1e-15)


def test_density_uses_the_mapped_coordinate():
    rating = numerical("rating", (1, 9), (-1, 1))
    xi = Gaussian(rating, 0.0, 0.5)
    assert evaluate(xi, 5) == pytest.approx(stats.norm(0, 0.5).pdf(0.0))
    assert evaluate(xi, 7) == pytest.approx(stats.norm(0, 0.5).pdf(0.5))


def test_evaluate_rejects_foreign_elements():
    with pytest.raises(DomainMismatch):
        evaluate(PointMass(HAPPY, PRESENT), "MAYBE")
    with pytest.raises(DomainMismatch):
        evaluate(Gaussian(VALENCE, 0, 0.2), 2.0)


def test_categorical_complement_is_derived():
    xi = FiniteSupport(HAPPY, {PRESENT: 0.3})
    assert evaluate(xi, ABSENT) == pytest.approx(0.7)
    assert masses(xi) == {ABSENT: pytest.approx(0.7), PRESENT: 0.3}


def test_variant_domains():
    with pytest.raises(DomainMismatch):
        Gaussian(EMOTION, 0, 1)
    with pytest.raises(DomainMismatch):
        GaussianMixture(HAPPY, ((1.0, 0, 1),))
    with pytest.raises(DomainMismatch):
        BernoulliPair(EMOTION, 0.5)
    with pytest.raises(ValueError):
        GaussianMixture(VALENCE, ((0.5, 0, 0.1), (0.4, 0.5, 0.1)))
    with pytest.raises(ValueError):
        Gaussian(VALENCE, 0, 0)
    with pytest.raises(ValueError):
        FiniteSupport(EMOTION, {"Angry": -0.1})


def test_bernoulli_pair():
    xi = BernoulliPair(COMPARISON, 2 / 3)
    assert evaluate(xi, HIGHER) == pytest.approx(2 / 3)
    assert evaluate(xi, LOWER) == pytest.approx(1 / 3)
    assert argmax_label(BernoulliPair(COMPARISON, 0.5)) == (HIGHER, True)


def test_normalize():
    xi = normalize(FiniteSupport(AB, {"A": 2, "B": 2}))
    assert xi.as_dict() == {"A": 0.5, "B": 0.5}
    pm = PointMass(VALENCE, 0.1)
    assert normalize(pm) is pm
    with pytest.raises(ZeroMass):
        normalize(FiniteSupport(AB, {"A": 0, "B": 0}))


def test_argmax_examples():
    assert argmax_label(FiniteSupport(EMOTION, {"Angry": 0.7, "Happy": 0.3})) == ("Angry", False)
    assert argmax_label(FiniteSupport(AB, {"A": 0.5, "B": 0.5})) == ("A", True)
    assert argmax_label(FiniteSupport(AB, {"B": 0.5, "A": 0.5})) == ("A", True)


def test_mixture_tie_agrees_with_grid_search():
    xi = GaussianMixture(VALENCE, ((0.5, -0.5, 0.1), (0.5, 0.5, 0.1)))
    grid = np.round(np.arange(-1000, 1001) * 1e-3, 3)
    dens = sum(w * stats.norm(m, s).pdf(grid) for w, m, s in xi.components)
    top = dens.max()
    modes = grid[np.abs(dens - top) <= 1e-9]
    assert modes.tolist() == [-0.5, 0.5]
    element, tie = argmax_label(xi)
    assert tie
    assert element == pytest.approx(-0.5, abs=1e-9)


def test_mixture_argmax_without_tie():
    xi = GaussianMixture(VALENCE, ((0.3, -0.5, 0.1), (0.7, 0.4, 0.1)))
    element, tie = argmax_label(xi)
    assert not tie
    assert element == pytest.approx(0.4, abs=1e-6)


def test_argmax_of_gaussian_clipped_to_bounds():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryMassWarning)
        xi = Gaussian(VALENCE, 1.4, 0.1)
    assert argmax_label(xi) == (1.0, False)


def test_boundary_mass_warning():
    with pytest.warns(BoundaryMassWarning):
        Gaussian(VALENCE, 0.95, 0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("error", BoundaryMassWarning)
        Gaussian(VALENCE, 0.0, 0.2)


def test_from_point_label():
    assert from_point_label(HAPPY, PRESENT) == PointMass(HAPPY, PRESENT)
    assert from_point_label(VALENCE, 0.4) == PointMass(VALENCE, 0.4)
    with pytest.raises(DomainMismatch):
        from_point_label(VALENCE, 3.0)


def test_expected_value():
    assert expected_value(Gaussian(VALENCE, 0.2, 0.1)) == 0.2
    assert expected_value(FiniteSupport(VALENCE, {0.0: 1, 0.5: 3})) == pytest.approx(0.375)
    with pytest.raises(DomainMismatch):
        expected_value(FiniteSupport(EMOTION, {"Angry": 1}))


def test_time_varying_invariants():
    f = (PointMass(VALENCE, 0.1), PointMass(VALENCE, 0.2))
    tv = TimeVaryingAmbiguity((0.0, 0.5), f)
    assert tv.at(0.5) == f[1] and len(tv) == 2
    with pytest.raises(GridMismatch):
        TimeVaryingAmbiguity((0.0,), f)
    with pytest.raises(GridMismatch):
        TimeVaryingAmbiguity((0.5, 0.0), f)
    with pytest.raises(DescriptorMismatch):
        TimeVaryingAmbiguity((0.0, 0.5), (f[0], PointMass(HAPPY, ABSENT)))


# -- properties ------------------------------------------------------------------------

LEVELS = ("l0", "l1", "l2", "l3", "l4")
SCALE = ordinal("scale", LEVELS)
finite_weights = st.dictionaries(st.sampled_from(LEVELS), st.floats(0, 10), min_size=1).filter(
    lambda w: sum(w.values()) > 0
)


@st.composite
def elements(draw):
    d = draw(st.sampled_from([HAPPY, SCALE, VALENCE, numerical("rating", (1, 9), (-1, 1))]))
    if d.is_finite:
        return d, draw(st.sampled_from(d.levels))
    return d, draw(st.floats(*d.bounds))


@given(elements(), st.data())
def test_point_label_degenerates_to_indicator(args, data):
    d, x = args
    xi = from_point_label(d, x)
    if d.is_finite:
        y = data.draw(st.sampled_from(d.levels))
    else:
        y = data.draw(st.sampled_from([x, data.draw(st.floats(*d.bounds))]))
    assert evaluate(xi, y) == (1.0 if y == x else 0.0)
    assert argmax_label(xi) == (x, False)


@given(finite_weights, st.floats(1e-3, 1e3))
def test_normalize_idempotent_and_preserves_argmax(weights, c):
    xi = FiniteSupport(SCALE, weights)
    once = normalize(xi)
    assert normalize(once) == once
    assert math.fsum(once.as_dict().values()) == pytest.approx(1.0, abs=1e-12)
    scaled = FiniteSupport(SCALE, {k: c * v for k, v in weights.items()})
    assert argmax_label(once)[0] == argmax_label(normalize(scaled))[0]


@given(st.floats(-1, 1), st.floats(1e-3, 2), st.floats(-3, 3))
def test_single_component_mixture_equals_gaussian(m, s, y):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryMassWarning)
        g = Gaussian(VALENCE, m, s)
        gm = GaussianMixture(VALENCE, ((1.0, m, s),))
    y = max(-1.0, min(1.0, y))
    assert abs(evaluate(g, y) - evaluate(gm, y)) <= 1e-12


@st.composite
def any_function(draw):
    kind = draw(st.sampled_from(["point", "finite", "gauss", "gmm", "bern"]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryMassWarning)
        if kind == "point":
            return PointMass(VALENCE, draw(st.floats(-1, 1)))
        if kind == "finite":
            return FiniteSupport(SCALE, draw(finite_weights))
        if kind == "gauss":
            return Gaussian(VALENCE, draw(st.floats(-5, 5)), draw(st.floats(1e-3, 5)))
        if kind == "gmm":
            k = draw(st.integers(1, 4))
            raw = draw(st.lists(st.floats(0.01, 1), min_size=k, max_size=k))
            comps = [(w / sum(raw), draw(st.floats(-2, 2)), draw(st.floats(1e-3, 2))) for w in raw]
            total = math.fsum(c[0] for c in comps)
            comps[0] = (comps[0][0] + 1.0 - total, *comps[0][1:])
            return GaussianMixture(VALENCE, tuple(comps))
        return BernoulliPair(COMPARISON, draw(st.floats(0, 1)))


@given(any_function(), st.data())
def test_evaluate_is_non_negative(xi, data):
    d = xi.descriptor
    x = data.draw(st.sampled_from(d.levels) if d.is_finite else st.floats(*d.bounds))
    v = evaluate(xi, x)
    assert v >= 0 and math.isfinite(v)


@settings(max_examples=200)
@given(any_function())
def test_json_round_trip(xi):
    lookup = {VALENCE.name: VALENCE, SCALE.name: SCALE}
    back = from_dict(to_dict(xi), lookup)
    assert back == xi
    assert to_dict(back) == to_dict(xi)


def test_from_dict_rejects_unknown_fields():
    data = to_dict(Gaussian(VALENCE, 0, 0.3))
    data["skew"] = 1.0
    with pytest.raises(ValueError, match="unknown"):
        from_dict(data, {"valence": VALENCE})
