"""Qualitative agreement: ordinal labels from pairwise segment comparisons.

Each annotator's trace is averaged over segments, and every pair of segments
is marked as a rise, a fall or no change (the *individual matrix*).  The
individual matrices are merged into a *consensus matrix* that keeps only
trends enough annotators share.  Ranking the segments from the consensus
gives relative ordinal labels.  Instead of discarding disagreement, the
per-pair outcome counts can also be kept as a distribution.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aggregation import AnnotationTrace
from .ambiguity import COMPARISON, HIGHER, LOWER, SAME, BernoulliPair, FiniteSupport
from .descriptors import TOL, AttributeDescriptor, Kind
from .errors import (
    DomainMismatch,
    EmptySegment,
    IndexOutOfRange,
    InsufficientData,
    SizeMismatch,
)

DEFAULT_THRESHOLD = 0.05


class Trend(enum.IntEnum):
    SAME = 0
    RISE = 1
    FALL = 2
    NO_AGREEMENT = 3
    UNDEFINED = 4


_MIRROR = {
    Trend.SAME: Trend.SAME,
    Trend.RISE: Trend.FALL,
    Trend.FALL: Trend.RISE,
    Trend.NO_AGREEMENT: Trend.NO_AGREEMENT,
    Trend.UNDEFINED: Trend.UNDEFINED,
}

INDIVIDUAL = "individual"
CONSENSUS = "consensus"


@dataclass(frozen=True, eq=False)
class TrendMatrix:
    """``entries[i, j]`` is the trend going from segment ``i`` to segment ``j``.

    RISE at ``(i, j)`` means segment ``j`` is higher than segment ``i``.
    """

    entries: np.ndarray
    kind: str = INDIVIDUAL

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.int8)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise SizeMismatch(f"trend matrix must be square, got shape {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def entry(self, i: int, j: int) -> Trend:
        return Trend(int(self.entries[i, j]))

    def __eq__(self, other):
        if not isinstance(other, TrendMatrix):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.entries, other.entries)

    def is_antisymmetric(self) -> bool:
        n = self.size
        return all(
            self.entry(j, i) is _MIRROR[self.entry(i, j)] for i in range(n) for j in range(n)
        ) and all(self.entry(i, i) is Trend.SAME for i in range(n))

    def labels(self) -> list[list[str]]:
        return [[self.entry(i, j).name for j in range(self.size)] for i in range(self.size)]


def segment_means(trace: AnnotationTrace, segments: Sequence[tuple[float, float]]) -> np.ndarray:
    """Mean of the samples with ``start <= t < end`` for each segment."""
    times, values = trace.times, trace.values
    spans = sorted((float(s), float(e)) for s, e in segments)
    for (s0, e0), (s1, _) in zip(spans, spans[1:]):
        if s1 < e0:
            raise ValueError(f"segments [{s0}, {e0}) and [{s1}, ...) overlap")
    means = []
    for k, (start, end) in enumerate(segments):
        if not start < end:
            raise ValueError(f"segment {k} has start >= end")
        mask = (times >= start) & (times < end)
        if not mask.any():
            raise EmptySegment(f"segment {k} [{start}, {end}) holds no samples of {trace.annotator!r}")
        means.append(float(values[mask].mean()))
    return np.array(means)


def matrix_from_means(means: Sequence[float], threshold: float) -> TrendMatrix:
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    m = np.asarray(means, dtype=float)
    diff = m[None, :] - m[:, None]
    e = np.full(diff.shape, Trend.SAME, dtype=np.int8)
    e[diff > threshold] = Trend.RISE
    e[diff < -threshold] = Trend.FALL
    return TrendMatrix(e, INDIVIDUAL)


def individual_matrix(trace: AnnotationTrace, segments: Sequence[tuple[float, float]], threshold: float) -> TrendMatrix:
    return matrix_from_means(segment_means(trace, segments), threshold)


def _check_same_size(ims: Sequence[TrendMatrix]) -> int:
    if not ims:
        raise InsufficientData("no individual matrices")
    sizes = {m.size for m in ims}
    if len(sizes) != 1:
        raise SizeMismatch(f"individual matrices have different sizes {sorted(sizes)}")
    return sizes.pop()


def consensus_matrix(ims: Sequence[TrendMatrix], agreement: float = 1.0) -> TrendMatrix:
    """Keep the trend at ``(i, j)`` when at least ``agreement`` of the annotators report it."""
    if not 0.5 < agreement <= 1.0:
        raise ValueError("agreement must lie in (0.5, 1]")
    n = _check_same_size(ims)
    if len(ims) < 2:
        raise InsufficientData("a consensus needs at least 2 annotators")
    stack = np.stack([m.entries for m in ims])
    needed = agreement * len(ims) - TOL
    out = np.full((n, n), Trend.NO_AGREEMENT, dtype=np.int8)
    for trend in (Trend.SAME, Trend.RISE, Trend.FALL):
        counts = (stack == trend).sum(axis=0)
        out[counts >= needed] = trend
    np.fill_diagonal(out, Trend.SAME)
    return TrendMatrix(out, CONSENSUS)


@dataclass(frozen=True)
class Ranking:
    """Segments ordered from highest to lowest.

    ``ranks`` pairs each segment with its 1-based position; ``scores`` are
    Copeland scores indexed by segment; ``coverage`` is the fraction of
    off-diagonal entries the consensus decided.
    """

    order: tuple[int, ...]
    ranks: tuple[tuple[int, int], ...]
    scores: tuple[int, ...]
    coverage: float


def rank_from_consensus(c: TrendMatrix) -> Ranking:
    """Copeland ranking over the decided entries of a consensus matrix.

    A segment scores +1 for every segment it is decidedly higher than and
    -1 for every segment it is decidedly lower than.  Ties keep segment
    index order.
    """
    e = c.entries
    n = c.size
    scores = (e == Trend.FALL).sum(axis=1) - (e == Trend.RISE).sum(axis=1)
    order = tuple(sorted(range(n), key=lambda i: (-int(scores[i]), i)))
    off = n * (n - 1)
    undecided = int(((e == Trend.NO_AGREEMENT) | (e == Trend.UNDEFINED)).sum())
    coverage = 1.0 if off == 0 else (off - undecided) / off
    return Ranking(
        order,
        tuple((seg, pos + 1) for pos, seg in enumerate(order)),
        tuple(int(s) for s in scores),
        coverage,
    )


OUTCOMES = (HIGHER, LOWER, SAME)
_OUTCOME_OF = {Trend.RISE: HIGHER, Trend.FALL: LOWER, Trend.SAME: SAME}


@dataclass(frozen=True)
class PairwiseOutcomeDistribution:
    """How the annotators split on whether segment ``j`` is higher than segment ``i``."""

    i: int
    j: int
    weights: tuple[tuple[str, float], ...]
    annotator_count: int

    def __post_init__(self):
        total = sum(w for _, w in self.weights)
        if abs(total - 1.0) > TOL:
            raise ValueError(f"outcome weights sum to {total!r}")
        if self.annotator_count < 1:
            raise ValueError("annotator_count must be positive")

    def __getitem__(self, outcome: str) -> float:
        return dict(self.weights)[outcome]

    def to_bernoulli(self) -> BernoulliPair:
        """Two-outcome form; only defined when no annotator reported SAME."""
        if self[SAME] != 0:
            raise ValueError("some annotators reported no change; the outcome space has three elements")
        return BernoulliPair(COMPARISON, self[HIGHER])


def pairwise_ambiguity(ims: Sequence[TrendMatrix], i: int, j: int) -> PairwiseOutcomeDistribution:
    n = _check_same_size(ims)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRange(f"segment pair ({i}, {j}) outside 0..{n - 1}")
    counts = Counter()
    for m in ims:
        trend = m.entry(i, j)
        if trend not in _OUTCOME_OF:
            raise ValueError(f"individual matrix holds {trend.name} at ({i}, {j})")
        counts[_OUTCOME_OF[trend]] += 1
    total = len(ims)
    return PairwiseOutcomeDistribution(i, j, tuple((o, counts[o] / total) for o in OUTCOMES), total)


def absolute_ordinal_distribution(labels: Sequence[str], d: AttributeDescriptor) -> FiniteSupport:
    """Relative frequency of each level of an ordinal scale."""
    if d.kind is not Kind.ORDINAL:
        raise DomainMismatch(f"{d.name!r} is not an ordinal descriptor")
    if not labels:
        raise InsufficientData("no labels")
    counts = Counter(d.check(x) for x in labels)
    n = len(labels)
    return FiniteSupport(d, tuple((level, counts[level] / n) for level in d.levels))
