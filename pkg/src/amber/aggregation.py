"""Turning several annotators' traces into labels.

The pipeline is: compensate a static reaction lag, optionally normalise each
annotator's scale, then either collapse the traces to a weighted mean trace
or fit an ambiguity function at every timestamp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ambiguity import FiniteSupport, Gaussian, GaussianMixture, TimeVaryingAmbiguity
from .descriptors import TOL, AttributeDescriptor, Kind
from .errors import (
    DegenerateTrace,
    GridMismatch,
    InsufficientData,
    NonNumericalAttribute,
)

#: Lower bound on fitted standard deviations.
SD_FLOOR = 1e-3

MAX_DELAY_S = 8.0
DELAY_STEP_S = 0.1
MIN_OVERLAP = 20

EM_RESTARTS = 50
EM_ITERATIONS = 200
EM_TOL = 1e-8


@dataclass(frozen=True)
class AnnotationTrace:
    """One annotator's labels for one attribute, as ``(time_s, value)`` samples."""

    annotator: str
    attribute: str
    samples: tuple[tuple[float, object], ...]
    sample_period_s: float | None = None

    def __post_init__(self):
        samples = tuple((float(t), v) for t, v in self.samples)
        if any(b[0] <= a[0] for a, b in zip(samples, samples[1:])):
            raise ValueError(f"trace {self.annotator}/{self.attribute}: times must be strictly increasing")
        if self.sample_period_s is not None and not self.sample_period_s > 0:
            raise ValueError("sample period must be positive")
        object.__setattr__(self, "samples", samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples], dtype=float)

    def with_values(self, values, annotator=None) -> "AnnotationTrace":
        return AnnotationTrace(
            self.annotator if annotator is None else annotator,
            self.attribute,
            tuple(zip(self.times.tolist(), (float(v) for v in values))),
            self.sample_period_s,
        )


@dataclass(frozen=True)
class AnnotatorModel:
    """Per-annotator affine correction ``value * scale + offset`` and a confidence weight."""

    annotator: str
    offset: float = 0.0
    scale: float = 1.0
    confidence: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")


def _common_period(traces: Sequence[AnnotationTrace]) -> float | None:
    periods = {t.sample_period_s for t in traces}
    if len(periods) > 1:
        raise GridMismatch(f"traces use different sample periods: {sorted(p for p in periods if p)}")
    return periods.pop() if periods else None


def _key(t: float) -> float:
    return round(t, 9)


def shared_times(traces: Sequence[AnnotationTrace]) -> np.ndarray:
    """Timestamps present in every trace, ascending."""
    if not traces:
        raise InsufficientData("no traces")
    _common_period(traces)
    shared = set(_key(t) for t, _ in traces[0].samples)
    for tr in traces[1:]:
        shared &= set(_key(t) for t, _ in tr.samples)
    if not shared:
        raise GridMismatch("traces share no timestamps")
    return np.array(sorted(shared))


def common_grid(traces: Sequence[AnnotationTrace]) -> tuple[np.ndarray, np.ndarray]:
    """Shared timestamps and the matching ``(n_traces, n_times)`` value matrix."""
    grid = shared_times(traces)
    rows = []
    for tr in traces:
        lookup = {_key(t): v for t, v in zip(tr.times, tr.values)}
        rows.append([lookup[t] for t in grid])
    return grid, np.asarray(rows, dtype=float)


def align_lag(traces: Sequence[AnnotationTrace], delay_s: float) -> list[AnnotationTrace]:
    """Shift every sample ``delay_s`` seconds earlier and drop samples that land before t=0."""
    if delay_s < 0:
        raise ValueError("delay must be non-negative")
    _common_period(traces)
    out = []
    for tr in traces:
        shifted = tuple(
            (_key(t - delay_s), v) for t, v in tr.samples if t - delay_s >= -TOL
        )
        out.append(AnnotationTrace(tr.annotator, tr.attribute, shifted, tr.sample_period_s))
    return out


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if den == 0.0:
        return math.nan
    return float(np.dot(a, b)) / den


def delay_profile(traces: Sequence[AnnotationTrace], reference: AnnotationTrace | None = None):
    """Mean correlation against the reference for every candidate delay.

    Returns ``(delays, scores)``; a score is NaN where the correlation is
    undefined or fewer than ``MIN_OVERLAP`` samples overlap.
    """
    traces = list(traces)
    if reference is None:
        if len(traces) < 2:
            raise InsufficientData("need at least 2 traces to estimate a delay")
        reference, traces = traces[0], traces[1:]
    _common_period([reference, *traces])
    rt, rv = reference.times, reference.values
    delays = np.round(np.arange(0, round(MAX_DELAY_S / DELAY_STEP_S) + 1) * DELAY_STEP_S, 10)
    scores = np.full(delays.shape, np.nan)
    for k, d in enumerate(delays):
        corrs = []
        for tr in traces:
            tt, tv = tr.times, tr.values
            target = rt + d
            ok = (target >= tt[0] - TOL) & (target <= tt[-1] + TOL)
            if ok.sum() < MIN_OVERLAP:
                corrs = None
                break
            shifted = np.interp(target[ok], tt, tv)
            r = _pearson(rv[ok], shifted)
            if math.isnan(r):
                corrs = None
                break
            corrs.append(r)
        if corrs:
            scores[k] = float(np.mean(corrs))
    return delays, scores


def estimate_delay(traces: Sequence[AnnotationTrace], reference: AnnotationTrace | None = None) -> float:
    """Static lag, in seconds, of the traces behind a reference signal.

    The reference is either an explicit content signal or, by default, the
    first trace (the result is then the lag of the remaining traces behind
    it).  Candidate delays run from 0 to 8 s in 0.1 s steps; the smallest
    delay with the highest mean Pearson correlation wins.
    """
    delays, scores = delay_profile(traces, reference)
    if np.all(np.isnan(scores)):
        raise InsufficientData("correlation is undefined at every candidate delay")
    best = np.nanmax(scores)
    return float(delays[np.flatnonzero(scores == best)[0]])


def normalize_annotators(traces: Sequence[AnnotationTrace]) -> tuple[list[AnnotationTrace], list[AnnotatorModel]]:
    """Match every trace's mean and variance to the pooled statistics of all traces.

    Each annotator gets ``x -> scale * x + offset``; the pooled mean and
    (population) variance over all samples are unchanged.
    """
    if not traces:
        raise InsufficientData("no traces")
    arrays = [tr.values for tr in traces]
    for tr, v in zip(traces, arrays):
        if len(np.unique(v)) < 2:
            raise DegenerateTrace(f"trace of {tr.annotator!r} has zero variance")
    pooled = np.concatenate(arrays)
    mu, sigma = float(pooled.mean()), float(pooled.std())
    out, models = [], []
    for tr, v in zip(traces, arrays):
        scale = sigma / float(v.std())
        offset = mu - scale * float(v.mean())
        out.append(tr.with_values(scale * v + offset))
        models.append(AnnotatorModel(tr.annotator, offset, scale))
    return out, models


def confidence_weights(traces: Sequence[AnnotationTrace]) -> list[AnnotatorModel]:
    """Leave-one-out agreement weights.

    An annotator's raw confidence is its Pearson correlation with the mean
    of everybody else, clipped at zero; the confidences are then scaled to
    sum to one.
    """
    if len(traces) < 3:
        raise InsufficientData("confidence weighting needs at least 3 annotators")
    _, values = common_grid(traces)
    n = len(traces)
    total = values.sum(axis=0)
    raw = []
    for p in range(n):
        others = (total - values[p]) / (n - 1)
        r = _pearson(values[p], others)
        raw.append(0.0 if math.isnan(r) else max(0.0, r))
    s = math.fsum(raw)
    if s == 0.0:
        raise InsufficientData("no annotator correlates positively with the others")
    return [AnnotatorModel(tr.annotator, confidence=r / s) for tr, r in zip(traces, raw)]


def weighted_mean_label(traces: Sequence[AnnotationTrace], models: Sequence[AnnotatorModel]) -> AnnotationTrace:
    """Confidence-weighted average trace on the traces' shared timestamps."""
    by_name = {m.annotator: m.confidence for m in models}
    weights = np.array([by_name[tr.annotator] for tr in traces], dtype=float)
    if abs(math.fsum(weights) - 1.0) > TOL:
        raise ValueError(f"weights sum to {math.fsum(weights)!r}, not 1")
    grid, values = common_grid(traces)
    mean = weights @ values
    lo, hi = values.min(axis=0), values.max(axis=0)
    mean = np.clip(mean, lo, hi)
    return AnnotationTrace(
        "weighted_mean",
        traces[0].attribute,
        tuple(zip(grid.tolist(), mean.tolist())),
        traces[0].sample_period_s,
    )


# ---------------------------------------------------------------------------
# Distribution fitting
# ---------------------------------------------------------------------------

EMPIRICAL = "empirical"
GAUSSIAN = "gaussian"
GMM = "gmm"


def _logsumexp(a, axis):
    m = a.max(axis=axis, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def _seed_means(x, k, rng):
    """k-means++ seeding on 1-D data."""
    centers = [x[rng.integers(len(x))]]
    for _ in range(1, k):
        d2 = np.min((x[:, None] - np.asarray(centers)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total <= 0:
            centers.append(x[rng.integers(len(x))])
        else:
            centers.append(x[rng.choice(len(x), p=d2 / total)])
    return np.asarray(centers, dtype=float)


def _em_batch(x, means, iterations, tol, sd_floor):
    """Run EM for every row of ``means`` (one row per restart) in lockstep.

    A restart stops updating after the iteration in which its
    log-likelihood changes by less than ``tol``, exactly as a sequential
    run would.
    """
    r, k = means.shape
    sds = np.full((r, k), max(float(x.std()), sd_floor))
    weights = np.full((r, k), 1.0 / k)
    prev = np.full(r, -np.inf)
    active = np.ones(r, dtype=bool)

    def log_joint(means, sds, weights):
        z = (x[None, :, None] - means[:, None, :]) / sds[:, None, :]
        return -0.5 * z * z - np.log(sds)[:, None, :] - 0.5 * math.log(2 * math.pi) + np.log(
            np.maximum(weights, 1e-300)
        )[:, None, :]

    for _ in range(iterations):
        if not active.any():
            break
        lj = log_joint(means, sds, weights)
        log_norm = _logsumexp(lj, axis=2)
        ll = log_norm.sum(axis=1)
        resp = np.exp(lj - log_norm[:, :, None])
        nk = resp.sum(axis=1)
        alive = nk > 1e-12
        safe = np.where(alive, nk, 1.0)
        new_means = np.where(alive, (resp * x[None, :, None]).sum(axis=1) / safe, means)
        var = (resp * (x[None, :, None] - new_means[:, None, :]) ** 2).sum(axis=1) / safe
        new_sds = np.where(alive, np.maximum(np.sqrt(var), sd_floor), sds)
        new_weights = nk / nk.sum(axis=1, keepdims=True)
        upd = active[:, None]
        means = np.where(upd, new_means, means)
        sds = np.where(upd, new_sds, sds)
        weights = np.where(upd, new_weights, weights)
        active &= ~(np.abs(ll - prev) < tol)
        prev = np.where(active, ll, prev)
    ll = _logsumexp(log_joint(means, sds, weights), axis=2).sum(axis=1)
    return ll, weights, means, sds


def fit_gmm(
    values,
    k: int,
    *,
    restarts: int = EM_RESTARTS,
    iterations: int = EM_ITERATIONS,
    tol: float = EM_TOL,
    sd_floor: float = SD_FLOOR,
    seed: int = 0,
):
    """Maximum-likelihood 1-D Gaussian mixture by expectation-maximisation.

    Restart ``i`` seeds its RNG with ``(seed, i)``; the restart with the
    highest final log-likelihood wins (lowest index on ties).  Returns
    ``(log_likelihood, components)`` with components sorted by mean.
    """
    x = np.asarray(values, dtype=float)
    if k < 1 or k > len(x):
        raise InsufficientData(f"cannot fit {k} components to {len(x)} values")
    starts = np.array([_seed_means(x, k, np.random.default_rng([seed, i])) for i in range(restarts)])
    lls, weights, means, sds = _em_batch(x, starts, iterations, tol, sd_floor)
    best = int(np.argmax(lls))
    w = weights[best] / math.fsum(weights[best])
    comps = sorted(zip(w.tolist(), means[best].tolist(), sds[best].tolist()), key=lambda c: (c[1], c[2]))
    return float(lls[best]), tuple(comps)


def fit_values(values, descriptor: AttributeDescriptor, family: str = GAUSSIAN, components: int = 2, seed: int = 0):
    """Fit an ambiguity function to the annotators' values at one instant."""
    values = list(values)
    if len(values) < 2:
        raise InsufficientData(f"need at least 2 annotator values, got {len(values)}")
    if family == EMPIRICAL:
        counts = {}
        for v in values:
            v = descriptor.check(v)
            counts[v] = counts.get(v, 0) + 1
        n = len(values)
        return FiniteSupport(descriptor, tuple((v, c / n) for v, c in counts.items()))
    if family not in (GAUSSIAN, GMM):
        raise ValueError(f"unknown family {family!r}")
    if descriptor.kind is not Kind.NUMERICAL:
        raise NonNumericalAttribute(f"{family} fitting needs a numerical descriptor, {descriptor.name!r} is {descriptor.kind.value}")
    x = np.array([descriptor.numeric_map(descriptor.check(v)) for v in values], dtype=float)
    if family == GAUSSIAN or components == 1:
        sd = max(float(x.std(ddof=1)), SD_FLOOR)
        mean = float(x.mean())
        if family == GAUSSIAN:
            return Gaussian(descriptor, mean, sd)
        return GaussianMixture(descriptor, ((1.0, mean, sd),))
    if components > len(x):
        raise InsufficientData(f"{components} components but only {len(x)} annotators")
    _, comps = fit_gmm(x, components, seed=seed)
    return GaussianMixture(descriptor, comps)


def values_at(traces: Sequence[AnnotationTrace], t: float) -> list:
    out = []
    for tr in traces:
        for s, v in tr.samples:
            if abs(s - t) <= 1e-6:
                out.append(v)
                break
    return out


def fit_ambiguity(
    traces: Sequence[AnnotationTrace],
    family: str,
    t: float,
    descriptor: AttributeDescriptor,
    *,
    components: int = 2,
    seed: int = 0,
):
    """Ambiguity function describing how the annotators disagree at time ``t``."""
    return fit_values(values_at(traces, t), descriptor, family, components, seed)


def fit_time_varying(
    traces: Sequence[AnnotationTrace],
    family: str,
    descriptor: AttributeDescriptor,
    *,
    components: int = 2,
    seed: int = 0,
) -> TimeVaryingAmbiguity:
    """:func:`fit_ambiguity` at every timestamp shared by all traces."""
    grid = shared_times(traces)
    funcs = tuple(fit_ambiguity(traces, family, float(t), descriptor, components=components, seed=seed) for t in grid)
    return TimeVaryingAmbiguity(tuple(grid.tolist()), funcs)
