"""Ranking clips by what annotators agree on qualitatively, not by their raw values."""

import numpy as np

from amber import ordinal
from amber.aggregation import AnnotationTrace
from amber.ordinal import (
    Trend,
    absolute_ordinal_distribution,
    consensus_matrix,
    individual_matrix,
    pairwise_ambiguity,
    rank_from_consensus,
    segment_means,
)

rng = np.random.default_rng(3)
period = 0.25
t = np.arange(0, 40, period)
segments = [(0, 8), (8, 16), (16, 24), (24, 32), (32, 40)]
levels = np.array([0.1, 0.6, -0.3, 0.3, -0.6])

# Four annotators see the same ups and downs but anchor them differently;
# the fourth swaps the last two segments.
traces = []
for k, (scale, offset) in enumerate([(1.0, 0.0), (0.5, 0.3), (1.4, -0.2), (0.8, 0.1)]):
    shape = levels.copy()
    if k == 3:
        shape[[3, 4]] = shape[[4, 3]]
    values = scale * np.repeat(shape, t.size // len(segments)) + offset + rng.normal(0, 0.02, t.size)
    traces.append(AnnotationTrace(f"a{k}", "arousal", tuple(zip(t, values)), period))

# Raw segment means disagree wildly across annotators...
for tr in traces:
    print(tr.annotator, np.round(segment_means(tr, segments), 2))

# ...but each one's trend matrix only records rise, fall or no change.
ims = [individual_matrix(tr, segments, threshold=0.05) for tr in traces]
print(ims[0].entries)

# Full agreement leaves every pair the fourth annotator disputes undecided;
# three out of four settles them.
for agreement in (1.0, 0.75):
    c = consensus_matrix(ims, agreement)
    r = rank_from_consensus(c)
    print(agreement, r.order, r.scores, r.coverage)
    print("  undecided pairs:", int((c.entries == Trend.NO_AGREEMENT).sum()) // 2)

# The split itself is a label: how many annotators thought segment 4 beat segment 3.
d = pairwise_ambiguity(ims, 3, 4)
print(d.weights)

# Absolute ordinal labels get the same treatment: a distribution over levels.
scale = ordinal("arousal_level", ("low", "mid", "high"))
print(absolute_ordinal_distribution(["mid", "high", "mid", "low"], scale).as_dict())
