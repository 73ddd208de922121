"""From several continuous annotation traces to one time-varying ambiguity label."""

import numpy as np

from amber import argmax_label, numerical
from amber.aggregation import (
    AnnotationTrace,
    align_lag,
    confidence_weights,
    estimate_delay,
    fit_time_varying,
    normalize_annotators,
    weighted_mean_label,
)

rng = np.random.default_rng(11)
valence = numerical("valence")

# A slowly varying "true" valence, watched by five annotators who each react
# 2 s late, use the scale differently and add their own noise.
period = 0.2
t = np.arange(0, 90, period)
truth = 0.5 * np.sin(2 * np.pi * t / 30) + 0.2 * np.sin(2 * np.pi * t / 7)
lag = int(2.0 / period)
late = np.concatenate([np.full(lag, truth[0]), truth[:-lag]])

traces = []
for k, (scale, offset, noise) in enumerate([(1.0, 0.0, 0.03), (0.7, 0.1, 0.03), (1.3, -0.1, 0.05),
                                            (0.9, 0.05, 0.04), (1.1, 0.0, 0.15)]):
    values = np.clip(scale * late + offset + rng.normal(0, noise, t.size), -1, 1)
    traces.append(AnnotationTrace(f"a{k}", "valence", tuple(zip(t.round(6), values)), period))

# The lag shows up as the shift that best lines the traces up with a reference.
reference = AnnotationTrace("content", "valence", tuple(zip(t.round(6), truth)), period)
delay = estimate_delay(traces, reference=reference)
print("estimated delay", delay)
aligned = align_lag(traces, delay)

# Per-annotator affine correction onto a shared mean and spread.
normalized, models = normalize_annotators(aligned)
for m in models:
    print(m.annotator, round(m.scale, 3), round(m.offset, 3))

# Annotators who agree with the rest get more weight; the noisy a4 gets least.
weighted = confidence_weights(normalized)
print({m.annotator: round(m.confidence, 3) for m in weighted})
consensus = weighted_mean_label(normalized, weighted)
print("correlation with truth", round(np.corrcoef(consensus.values, truth[: consensus.values.size])[0, 1], 3))

# Keeping the disagreement instead: one Gaussian per timestamp.
xi = fit_time_varying(normalized, "gaussian", valence)
spread = np.array([f.sd for f in xi.functions])
print(len(xi.times), "timestamps, median sd", round(float(np.median(spread)), 3))

# Or a two-component mixture when the annotators split into camps.
camps = [AnnotationTrace(f"c{k}", "valence", tuple(zip(t[:20].round(6), np.full(20, v) + rng.normal(0, 0.02, 20))), period)
         for k, v in enumerate([-0.5, -0.5, -0.5, 0.5, 0.5, 0.5])]
split = fit_time_varying(camps, "gmm", valence, components=2, seed=3)
print(split.functions[0].components)
print(argmax_label(split.functions[0]))
