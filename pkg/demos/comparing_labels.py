"""Losses between ambiguity-aware labels, and what point predictions lose."""

import numpy as np

from amber import FiniteSupport, Gaussian, GaussianMixture, PointMass, categorical, numerical
from amber.aggregation import AnnotationTrace
from amber.ambiguity import TimeVaryingAmbiguity
from amber.metrics import implicit_ambiguity, kl_divergence, loss_breakdown, total_variation
from amber.representation import EmotionRepresentation

valence = numerical("valence")

# Closed form for two Gaussians.
print(kl_divergence(Gaussian(valence, 0.0, 0.2), Gaussian(valence, 0.1, 0.2)).value)

# KL is not symmetric: a sharp guess inside a broad truth costs less than
# the other way round.
sharp, broad = Gaussian(valence, 0.0, 0.05), Gaussian(valence, 0.0, 0.3)
print(round(kl_divergence(broad, sharp).value, 3), round(kl_divergence(sharp, broad).value, 3))

# Mixtures go through Monte Carlo with a fixed seed and report a standard error.
split = GaussianMixture(valence, ((0.5, -0.5, 0.1), (0.5, 0.5, 0.1)))
r = kl_divergence(split, Gaussian(valence, 0.0, 0.5))
print(round(r.value, 3), "+/-", round(r.std_error, 3))

# Finite supports sum exactly; missing mass in q is smoothed and flagged.
anger = categorical("Anger")
p = FiniteSupport(anger, {"PRESENT": 0.7, "ABSENT": 0.3})
q = PointMass(anger, "PRESENT")
r = kl_divergence(p, q)
print(round(r.value, 3), r.smoothing_applied, total_variation(p, q).value)

# A model that predicts a mean and a variance per frame defines a Gaussian
# per frame, which can be scored against an aggregated ambiguity label.
t = np.round(np.arange(0, 5, 0.5), 6)
true_mean = 0.4 * np.sin(t)
truth = TimeVaryingAmbiguity(tuple(t), tuple(Gaussian(valence, m, 0.1) for m in true_mean))
mean_trace = AnnotationTrace("model", "valence", tuple(zip(t, true_mean + 0.05)))
for var in (0.0001, 0.01, 0.04):
    var_trace = AnnotationTrace("model", "valence", tuple(zip(t, np.full(t.size, var))))
    pred = implicit_ambiguity(mean_trace, var_trace, valence)
    loss = loss_breakdown(EmotionRepresentation("s", {"valence": truth}), EmotionRepresentation("s", {"valence": pred}))
    print(f"predicted variance {var}: loss {loss.value:.3f}")
