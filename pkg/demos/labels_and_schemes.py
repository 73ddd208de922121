"""Typed label spaces, ambiguity functions and scheme constraints."""

import numpy as np

from amber import (
    PRESENT,
    Constraint,
    EmotionRepresentation,
    FiniteSupport,
    Gaussian,
    Scheme,
    argmax_label,
    attach_numeric_map,
    categorical,
    check_scheme_constraints,
    distance,
    evaluate,
    from_point_label,
    make_blended,
    map_to_numeric,
    numerical,
    ordinal,
    to_single_valued,
)
from amber.descriptors import ABSENT, MUTUALLY_EXCLUSIVE

# Three kinds of descriptor.  A categorical one is a yes/no question about
# a single emotion; an ordinal one has ordered levels; a numerical one is
# an interval with an affine map onto a target range.
happy = categorical("Happiness")
intensity = ordinal("intensity", ("low", "medium", "high"))
rating = numerical("valence_rating", bounds=(1, 9), interval=(-1, 1))

print(map_to_numeric(rating, 5))  # midpoint of 1..9 lands on 0
print(distance(rating, 1, 9))  # the full scale spans 2 after mapping

# Ordinal levels only get distances once a map is attached.
intensity = attach_numeric_map(intensity, {"low": 0.0, "medium": 0.5, "high": 1.0})
print(distance(intensity, "low", "high"))

# A plain label is the degenerate case: all mass on one element.
xi = from_point_label(rating, 7)
print(evaluate(xi, 7), evaluate(xi, 6.5))

# Ambiguous labels spread mass instead.
vague = FiniteSupport(intensity, {"medium": 0.6, "high": 0.4})
print(argmax_label(vague))
# Densities live on the mapped axis, so a mean of 0.25 is a rating of 6.
g = Gaussian(rating, mean=0.25, sd=0.2)
print(round(evaluate(g, 6.0), 5))

# Schemes bundle descriptors and a constraint on the categorical ones.
names = ("Anger", "Sadness", "Happiness", "Neutral")
exclusive = Scheme("exclusive", tuple(categorical(n) for n in names), MUTUALLY_EXCLUSIVE)
blended = Scheme("blended", exclusive.descriptors, Constraint.blended(0.3, 0.7))

rep = make_blended("Anger", "Sadness", q=0.7, p=0.3, scheme=blended)
print({n: evaluate(rep[n], PRESENT) for n in names})
print(check_scheme_constraints(rep, blended).valid)

# Two categories fully present at once breaks mutual exclusivity.
clash = EmotionRepresentation("exclusive", {
    n: from_point_label(exclusive[n], PRESENT if n in ("Anger", "Happiness") else ABSENT) for n in names
})
print(check_scheme_constraints(clash, exclusive).violations)

# Collapsing back to one value per descriptor.
print(to_single_valued(rep))
print(np.round(to_single_valued(EmotionRepresentation("r", {"valence_rating": g}), "mean")["valence_rating"], 3))
