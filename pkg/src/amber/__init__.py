"""Ambiguity-aware emotion label representations.

Typed label spaces (categorical, numerical, ordinal), ambiguity functions
over them, multi-annotator aggregation, qualitative-agreement ranking and
divergences between ambiguity-aware labels.
"""

__version__ = "0.1.0"

from .ambiguity import (
    BernoulliPair,
    FiniteSupport,
    Gaussian,
    GaussianMixture,
    PointMass,
    TimeVaryingAmbiguity,
    argmax_label,
    evaluate,
    from_point_label,
    normalize,
)
from .descriptors import (
    ABSENT,
    PRESENT,
    AttributeDescriptor,
    Constraint,
    Kind,
    Scheme,
    attach_numeric_map,
    categorical,
    distance,
    map_to_numeric,
    numerical,
    ordinal,
    validate_descriptor,
)
from .representation import (
    EmotionRepresentation,
    categorical_centroids,
    check_scheme_constraints,
    make_blended,
    to_single_valued,
)

__all__ = [
    "ABSENT",
    "PRESENT",
    "AttributeDescriptor",
    "BernoulliPair",
    "Constraint",
    "EmotionRepresentation",
    "FiniteSupport",
    "Gaussian",
    "GaussianMixture",
    "Kind",
    "PointMass",
    "Scheme",
    "TimeVaryingAmbiguity",
    "argmax_label",
    "attach_numeric_map",
    "categorical",
    "categorical_centroids",
    "check_scheme_constraints",
    "distance",
    "evaluate",
    "from_point_label",
    "make_blended",
    "map_to_numeric",
    "normalize",
    "numerical",
    "ordinal",
    "to_single_valued",
    "validate_descriptor",
]
