"""Divergences between ambiguity functions and losses between representations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .aggregation import SD_FLOOR, AnnotationTrace
from .ambiguity import (
    DENSITY_VARIANTS,
    FINITE_VARIANTS,
    Gaussian,
    TimeVaryingAmbiguity,
    masses,
    mixture_components,
    normalize,
)
from .descriptors import TOL, AttributeDescriptor, Kind
from .errors import DescriptorMismatch, GridMismatch, NegativeVariance, SchemeMismatch, UnsupportedPair
from .representation import EmotionRepresentation

#: Additive smoothing applied to ``q`` where ``p`` has mass and ``q`` has none.
EPSILON = 1e-6
MC_SAMPLES = 10_000
MC_SEED = 0


@dataclass(frozen=True)
class DivergenceResult:
    value: float
    method: str
    smoothing_applied: bool = False
    std_error: float | None = None

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError(f"divergence must be non-negative, got {self.value!r}")


def _check_pair(p, q):
    if p.descriptor != q.descriptor:
        raise DescriptorMismatch(f"cannot compare functions over {p.descriptor.name!r} and {q.descriptor.name!r}")


def _finite_tables(p, q):
    pt, qt = masses(normalize(p)), masses(normalize(q))
    support = list(dict.fromkeys([*pt, *qt]))
    return support, [pt.get(x, 0.0) for x in support], [qt.get(x, 0.0) for x in support]


def _as_mixture(xi, smoothing):
    """Mixture components for a density, or for a finite function on a numerical axis when smoothing.

    Smoothing replaces every atom by a Gaussian kernel of width ``SD_FLOOR``.
    """
    if isinstance(xi, DENSITY_VARIANTS):
        return mixture_components(xi), False
    if not smoothing or xi.descriptor.kind is not Kind.NUMERICAL:
        raise UnsupportedPair(f"cannot compare {type(xi).__name__} with a density without smoothing")
    f = xi.descriptor.numeric_map
    table = masses(normalize(xi))
    return tuple((w, f(x), SD_FLOOR) for x, w in table.items() if w > 0), True


def _log_mixture(components, y):
    w = np.array([c[0] for c in components])
    m = np.array([c[1] for c in components])
    s = np.array([c[2] for c in components])
    z = (y[:, None] - m[None, :]) / s[None, :]
    logs = np.log(np.maximum(w, 1e-300))[None, :] - 0.5 * z * z - np.log(s)[None, :] - 0.5 * math.log(2 * math.pi)
    top = logs.max(axis=1, keepdims=True)
    return (top + np.log(np.exp(logs - top).sum(axis=1, keepdims=True)))[:, 0]


def _sample_mixture(components, n, rng):
    w = np.array([c[0] for c in components])
    idx = rng.choice(len(components), size=n, p=w / w.sum())
    m = np.array([c[1] for c in components])[idx]
    s = np.array([c[2] for c in components])[idx]
    return rng.normal(m, s)


def gaussian_kl(m1: float, s1: float, m2: float, s2: float) -> float:
    return max(0.0, math.log(s2 / s1) + (s1 * s1 + (m1 - m2) ** 2) / (2.0 * s2 * s2) - 0.5)


def kl_divergence(p, q, *, smoothing: bool = True, samples: int = MC_SAMPLES, seed: int = MC_SEED) -> DivergenceResult:
    """Kullback-Leibler divergence ``KL(p || q)``.

    * finite vs finite: exact sum over the joint support, with ``EPSILON``
      smoothing of ``q`` when it misses part of ``p``'s support;
    * Gaussian vs Gaussian: closed form;
    * any other pair involving a density: Monte Carlo over ``samples``
      draws from ``p`` with a fixed seed.  Finite functions on numerical
      descriptors enter as narrow Gaussian kernels (flagged as smoothing).
    """
    _check_pair(p, q)
    if isinstance(p, FINITE_VARIANTS) and isinstance(q, FINITE_VARIANTS):
        _, pw, qw = _finite_tables(p, q)
        smoothed = any(a > 0 and b == 0 for a, b in zip(pw, qw))
        if smoothed:
            if not smoothing:
                raise UnsupportedPair("q is zero where p has mass")
            total = 1.0 + EPSILON * len(qw)
            qw = [(b + EPSILON) / total for b in qw]
        value = math.fsum(a * math.log(a / b) for a, b in zip(pw, qw) if a > 0)
        return DivergenceResult(max(value, 0.0), "kl", smoothed)

    if isinstance(p, Gaussian) and isinstance(q, Gaussian):
        return DivergenceResult(gaussian_kl(p.mean, p.sd, q.mean, q.sd), "kl")

    pc, p_smoothed = _as_mixture(p, smoothing)
    qc, q_smoothed = _as_mixture(q, smoothing)
    if len(pc) == 1 and len(qc) == 1:
        (_, m1, s1), (_, m2, s2) = pc[0], qc[0]
        return DivergenceResult(gaussian_kl(m1, s1, m2, s2), "kl", p_smoothed or q_smoothed)
    if pc == qc:
        return DivergenceResult(0.0, "kl", p_smoothed or q_smoothed, 0.0)
    rng = np.random.default_rng(seed)
    y = _sample_mixture(pc, samples, rng)
    diff = _log_mixture(pc, y) - _log_mixture(qc, y)
    value = float(diff.mean())
    se = float(diff.std(ddof=1) / math.sqrt(samples))
    return DivergenceResult(max(value, 0.0), "kl", p_smoothed or q_smoothed, se)


def total_variation(p, q) -> DivergenceResult:
    """Half the L1 distance between two normalised finite functions."""
    _check_pair(p, q)
    if not (isinstance(p, FINITE_VARIANTS) and isinstance(q, FINITE_VARIANTS)):
        raise UnsupportedPair("total variation is only provided for finite supports")
    _, pw, qw = _finite_tables(p, q)
    return DivergenceResult(0.5 * math.fsum(abs(a - b) for a, b in zip(pw, qw)), "tv")


DIVERGENCES: dict[str, Callable] = {"kl": kl_divergence, "tv": total_variation}


def divergence(p, q, method: str = "kl", *, seed: int = MC_SEED) -> DivergenceResult:
    if method not in DIVERGENCES:
        raise ValueError(f"unknown divergence {method!r}; choose from {sorted(DIVERGENCES)}")
    if method == "kl":
        return kl_divergence(p, q, seed=seed)
    return DIVERGENCES[method](p, q)


@dataclass(frozen=True)
class LossBreakdown:
    value: float
    method: str
    per_time: dict = field(default_factory=dict)
    smoothing_applied: bool = False


def loss_breakdown(
    true_rep: EmotionRepresentation, pred_rep: EmotionRepresentation, method: str = "kl", *, seed: int = MC_SEED
) -> LossBreakdown:
    """Mean divergence over every descriptor and timestamp, with a per-time mean.

    Time-constant entries contribute one term each, reported under the
    ``None`` key of ``per_time``.
    """
    if true_rep.scheme_ref != pred_rep.scheme_ref or set(true_rep.per_descriptor) != set(pred_rep.per_descriptor):
        raise SchemeMismatch("representations use different schemes")
    terms, per_time, smoothed = [], {}, False
    for name in sorted(true_rep.per_descriptor):
        a, b = true_rep[name], pred_rep[name]
        tv_a, tv_b = isinstance(a, TimeVaryingAmbiguity), isinstance(b, TimeVaryingAmbiguity)
        if tv_a != tv_b:
            raise GridMismatch(f"{name}: one representation is time-varying and the other is not")
        if tv_a:
            if len(a.times) != len(b.times) or any(abs(s - t) > TOL for s, t in zip(a.times, b.times)):
                raise GridMismatch(f"{name}: timestamp grids differ")
            pairs = zip(a.times, a.functions, b.functions)
        else:
            pairs = [(None, a, b)]
        for t, fa, fb in pairs:
            r = divergence(fa, fb, method, seed=seed)
            smoothed |= r.smoothing_applied
            terms.append(r.value)
            per_time.setdefault(t, []).append(r.value)
    keys = sorted(per_time, key=lambda t: (t is not None, t if t is not None else 0.0))
    per_time = {t: math.fsum(per_time[t]) / len(per_time[t]) for t in keys}
    return LossBreakdown(math.fsum(terms) / len(terms), method, per_time, smoothed)


def representation_loss(true_rep: EmotionRepresentation, pred_rep: EmotionRepresentation, divergence: str = "kl") -> float:
    return loss_breakdown(true_rep, pred_rep, divergence).value


def implicit_ambiguity(
    mean_trace: AnnotationTrace, variance_trace: AnnotationTrace, descriptor: AttributeDescriptor
) -> TimeVaryingAmbiguity:
    """Gaussian ambiguity implied by predicted means and variances."""
    mt, vt = mean_trace.times, variance_trace.times
    if len(mt) != len(vt) or np.any(np.abs(mt - vt) > TOL):
        raise GridMismatch("mean and variance traces use different timestamps")
    variances = variance_trace.values
    if np.any(variances < 0):
        raise NegativeVariance("variance trace has negative entries")
    funcs = tuple(
        Gaussian(descriptor, float(m), max(math.sqrt(float(v)), SD_FLOOR))
        for m, v in zip(mean_trace.values, variances)
    )
    return TimeVaryingAmbiguity(tuple(mt.tolist()), funcs)

