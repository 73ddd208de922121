"""Batch pipelines behind the command-line interface.

Every subcommand is expressed as a :class:`PipelineConfig` and executed by
:func:`run_pipeline`, which returns a JSON-ready document.  Outputs depend
only on the inputs and ``rng_seed``.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .aggregation import (
    EMPIRICAL,
    GAUSSIAN,
    GMM,
    AnnotatorModel,
    align_lag,
    confidence_weights,
    estimate_delay,
    fit_values,
    normalize_annotators,
    shared_times,
    values_at,
    weighted_mean_label,
)
from .ambiguity import PointMass, TimeVaryingAmbiguity, argmax_label, to_dict
from .descriptors import Kind, Scheme
from .errors import AmberError, InsufficientData, UnknownDescriptor
from .formats import (
    FORMAT_VERSION,
    SUPPORTED_VERSIONS,
    ingest_traces,
    load_representation,
    load_scheme,
    read_json,
    read_segments,
    representation_document,
    scheme_to_dict,
)
from .metrics import EPSILON, MC_SAMPLES, loss_breakdown
from .ordinal import (
    DEFAULT_THRESHOLD,
    OUTCOMES,
    consensus_matrix,
    individual_matrix,
    pairwise_ambiguity,
    rank_from_consensus,
)
from .representation import MEAN, MODE, EmotionRepresentation, check_scheme_constraints, point_representation

logger = logging.getLogger(__name__)

COMMANDS = ("validate", "aggregate", "qa-rank", "convert", "divergence", "report")
FAMILIES = (EMPIRICAL, GAUSSIAN, GMM, "point")
METHODS = ("kl", "tv")

NOTES = {
    "lag": "reaction lag is compensated by a single static shift per run",
    "lag-auto": "automatic delay is the lag of the other annotators behind the reference annotator",
    "lag-grid": "the automatic delay is applied rounded to a whole number of sample periods",
    "time-invariant": "annotator transcription maps are assumed not to change over time",
    "normalise": "annotator normalisation matches each trace's mean and variance to the pooled statistics",
    "clip": "normalised values outside the descriptor bounds were clipped to the bounds",
    "confidence": "annotator confidence is leave-one-out Pearson correlation clipped at 0, scaled to sum to 1",
    "untruncated": "densities are not truncated to the descriptor bounds",
    "finite-empirical": "non-numerical descriptors are always fitted with the empirical family",
    "segments": "segments are half-open intervals [start, end)",
    "copeland": "ranking uses Copeland scores over decided pairs; undecided pairs are ignored",
    "higher": "HIGHER for pair (i, j) means segment j was rated above segment i",
    "smoothing": f"finite supports are smoothed with epsilon={EPSILON} where q lacks mass; "
    "point masses meeting densities become Gaussian kernels of sd 1e-3",
    "mc": f"mixture divergences use {MC_SAMPLES} Monte Carlo samples with the run seed",
    "mean-policy": "the mean policy treats the normalised ambiguity function as a probability distribution",
    "euclid": "no multi-attribute metric is applied; descriptors are compared one at a time",
}


@dataclass(frozen=True)
class PipelineConfig:
    command: str
    inputs: tuple[str, ...] = ()
    scheme_path: str | None = None
    output_path: str | None = None
    family: str = GAUSSIAN
    components: int = 2
    threshold: float = DEFAULT_THRESHOLD
    agreement: float = 1.0
    delay: str = "0"
    reference_annotator: str | None = None
    normalize: bool = False
    method: str = "kl"
    policy: str = MODE
    attribute: str | None = None
    segments_path: str | None = None
    rng_seed: int = 0
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        problems = []
        if self.command not in COMMANDS:
            problems.append(f"unknown command {self.command!r}")
        if any(not p for p in self.inputs) or any(
            p == "" for p in (self.scheme_path, self.output_path, self.segments_path)
        ):
            problems.append("paths must be non-empty")
        if self.family not in FAMILIES:
            problems.append(f"family must be one of {FAMILIES}")
        if self.components < 1:
            problems.append("components must be at least 1")
        if not self.threshold > 0:
            problems.append("threshold must be positive")
        if not 0.5 < self.agreement <= 1.0:
            problems.append("agreement must lie in (0.5, 1]")
        if self.delay != "auto":
            try:
                if float(self.delay) < 0:
                    problems.append("delay must be non-negative")
            except ValueError:
                problems.append("delay must be 'auto' or a number of seconds")
        if self.method not in METHODS:
            problems.append(f"method must be one of {METHODS}")
        if self.policy not in (MODE, MEAN):
            problems.append("policy must be 'mode' or 'mean'")
        if self.format_version not in SUPPORTED_VERSIONS:
            problems.append(f"format_version must be one of {SUPPORTED_VERSIONS}")
        if problems:
            raise ValueError("; ".join(problems))

    def digest(self) -> str:
        """Hash of every setting that can influence the output (the output path cannot)."""
        settings = asdict(self)
        del settings["output_path"]
        blob = json.dumps(settings, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _report(config: PipelineConfig, notes, **extra) -> dict:
    return {
        "command": config.command,
        "config_sha256": config.digest(),
        "software_version": __version__,
        "format_version": config.format_version,
        "rng_seed": config.rng_seed,
        "assumptions": [NOTES[n] for n in dict.fromkeys(notes)],
        **extra,
    }


def _need(config, n):
    if len(config.inputs) != n:
        raise ValueError(f"{config.command} takes {n} input file(s), got {len(config.inputs)}")


def _scheme(config) -> Scheme | None:
    return None if config.scheme_path is None else load_scheme(config.scheme_path)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _validate(config):
    _need(config, 1)
    scheme = _scheme(config)
    rep, scheme = load_representation(config.inputs[0], scheme)
    report = check_scheme_constraints(rep, scheme)
    return {
        "format_version": config.format_version,
        "valid": report.valid,
        "violations": list(report.violations),
        "warnings": list(report.warnings),
        "report": _report(config, []),
    }


def _align(traces, config, notes):
    if config.delay == "auto":
        names = [tr.annotator for tr in traces]
        ref_name = config.reference_annotator or names[0]
        if ref_name not in names:
            raise UnknownDescriptor(f"reference annotator {ref_name!r} has no trace")
        ref = traces[names.index(ref_name)]
        others = [tr for tr in traces if tr is not ref]
        estimated = estimate_delay(others, reference=ref)
        period = ref.sample_period_s
        delay = estimated if not period else round(round(estimated / period) * period, 9)
        shifted = iter(align_lag(others, delay))
        notes += ["lag", "lag-auto", "lag-grid"]
        return [tr if tr is ref else next(shifted) for tr in traces], {"estimated_s": estimated, "applied_s": delay}
    delay = float(config.delay)
    if delay:
        notes.append("lag")
    return align_lag(traces, delay), {"estimated_s": None, "applied_s": delay}


def _fit_at(traces, d, family, t, config):
    values = values_at(traces, t)
    if family == "point":
        return PointMass(d, values[0])
    return fit_values(values, d, family, config.components, config.rng_seed)


def _aggregate(config):
    _need(config, 1)
    if config.scheme_path is None:
        raise ValueError("aggregate needs a scheme file")
    scheme = load_scheme(config.scheme_path)
    traces = ingest_traces(config.inputs[0], scheme)
    notes = ["time-invariant"]
    prepared, details = {}, {}
    for d in scheme.descriptors:
        group = [tr for tr in traces if tr.attribute == d.name]
        if not group:
            raise InsufficientData(f"no traces for descriptor {d.name!r}")
        info = {"annotators": [tr.annotator for tr in group]}
        family = config.family
        if d.kind is Kind.NUMERICAL:
            group, info["delay"] = _align(group, config, notes)
            if config.normalize:
                group, models = normalize_annotators(group)
                notes.append("normalise")
                lo, hi = d.bounds
                if any(v < lo or v > hi for tr in group for v in tr.values):
                    group = [tr.with_values(np.clip(tr.values, lo, hi)) for tr in group]
                    notes.append("clip")
                info["normalisation"] = [
                    {"annotator": m.annotator, "offset": m.offset, "scale": m.scale} for m in models
                ]
            if family == "point":
                if len(group) >= 3:
                    models = confidence_weights(group)
                    notes.append("confidence")
                else:
                    models = [AnnotatorModel(tr.annotator, confidence=1.0 / len(group)) for tr in group]
                info["weights"] = {m.annotator: m.confidence for m in models}
                group = [weighted_mean_label(group, models)]
            else:
                notes.append("untruncated")
        elif family != EMPIRICAL:
            family = EMPIRICAL
            notes.append("finite-empirical")
        prepared[d.name] = (group, family)
        details[d.name] = info

    grid = None
    for group, _ in prepared.values():
        times = set(shared_times(group).tolist())
        grid = times if grid is None else grid & times
    if not grid:
        raise InsufficientData("descriptors share no timestamps after alignment")
    grid = sorted(grid)

    entries = {}
    for d in scheme.descriptors:
        group, family = prepared[d.name]
        funcs = tuple(_fit_at(group, d, family, t, config) for t in grid)
        entries[d.name] = TimeVaryingAmbiguity(tuple(grid), funcs)
    rep = EmotionRepresentation(scheme.name, entries)
    report = _report(config, notes, family=config.family, descriptors=details)
    return representation_document(rep, scheme, report)


def _qa_rank(config):
    _need(config, 1)
    if config.segments_path is None:
        raise ValueError("qa-rank needs --segments")
    scheme = _scheme(config)
    traces = ingest_traces(config.inputs[0], scheme)
    attributes = list(dict.fromkeys(tr.attribute for tr in traces))
    attribute = config.attribute
    if attribute is None:
        if len(attributes) != 1:
            raise ValueError(f"several attributes in file ({', '.join(attributes)}); pick one with --attribute")
        attribute = attributes[0]
    group = [tr for tr in traces if tr.attribute == attribute]
    if not group:
        raise UnknownDescriptor(f"no traces for attribute {attribute!r}")
    segments = read_segments(config.segments_path)
    ids = [s[0] for s in segments]
    spans = [(s[1], s[2]) for s in segments]
    ims = [individual_matrix(tr, spans, config.threshold) for tr in group]
    consensus = consensus_matrix(ims, config.agreement)
    ranking = rank_from_consensus(consensus)
    pairs = []
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            dist = pairwise_ambiguity(ims, i, j)
            pairs.append(
                {
                    "i": ids[i],
                    "j": ids[j],
                    "weights": {o: dist[o] for o in OUTCOMES},
                    "annotators": dist.annotator_count,
                    "consensus": consensus.entry(i, j).name,
                }
            )
    notes = ["segments", "copeland", "higher"]
    return {
        "format_version": config.format_version,
        "attribute": attribute,
        "segments": ids,
        "threshold": config.threshold,
        "agreement": config.agreement,
        "annotators": [tr.annotator for tr in group],
        "individual_matrices": {tr.annotator: m.labels() for tr, m in zip(group, ims)},
        "matrix": consensus.labels(),
        "ranking": [
            {"segment": ids[seg], "rank": rank, "score": ranking.scores[seg]} for seg, rank in ranking.ranks
        ],
        "coverage": ranking.coverage,
        "pairs": pairs,
        "report": _report(config, notes),
    }


def _convert(config):
    _need(config, 1)
    scheme = _scheme(config)
    rep, scheme = load_representation(config.inputs[0], scheme)
    notes = ["mean-policy"] if config.policy == MEAN else []
    out = point_representation(rep, config.policy)
    return representation_document(out, scheme, _report(config, notes, policy=config.policy))


def _divergence(config):
    _need(config, 2)
    scheme = _scheme(config)
    true_rep, scheme = load_representation(config.inputs[0], scheme)
    pred_rep, _ = load_representation(config.inputs[1], scheme)
    result = loss_breakdown(true_rep, pred_rep, config.method, seed=config.rng_seed)
    notes = ["euclid"] + (["smoothing", "mc"] if config.method == "kl" else [])
    return {
        "format_version": config.format_version,
        "method": result.method,
        "value": result.value,
        "smoothing_applied": result.smoothing_applied,
        "per_time": [{"time": t, "value": v} for t, v in result.per_time.items()],
        "report": _report(config, notes),
    }


def _summarise_entry(entry):
    funcs = entry.functions if isinstance(entry, TimeVaryingAmbiguity) else (entry,)
    variants = {}
    for f in funcs:
        variants[type(f).__name__] = variants.get(type(f).__name__, 0) + 1
    modes = [argmax_label(f) for f in funcs]
    return {
        "timestamps": len(funcs),
        "variants": dict(sorted(variants.items())),
        "ties": sum(1 for _, tie in modes if tie),
        "first": to_dict(funcs[0]),
    }


def _report_cmd(config):
    _need(config, 1)
    doc = read_json(config.inputs[0])
    out = {"format_version": config.format_version, "artifact": config.inputs[0]}
    if "descriptors" in doc and "scheme" in doc:
        rep, scheme = load_representation(config.inputs[0], _scheme(config))
        out["kind"] = "representation"
        out["scheme"] = scheme_to_dict(scheme)
        out["descriptors"] = {n: _summarise_entry(e) for n, e in rep.per_descriptor.items()}
    elif "ranking" in doc:
        out["kind"] = "ranking"
        out["coverage"] = doc["coverage"]
        out["order"] = [r["segment"] for r in doc["ranking"]]
        out["undecided_pairs"] = sum(1 for p in doc["pairs"] if p["consensus"] == "NO_AGREEMENT")
    elif "value" in doc and "method" in doc:
        out["kind"] = "divergence"
        out["value"] = doc["value"]
        out["smoothing_applied"] = doc["smoothing_applied"]
    elif "valid" in doc:
        out["kind"] = "validation"
        out["valid"] = doc["valid"]
        out["violations"] = len(doc["violations"])
    else:
        raise AmberError(f"{config.inputs[0]}: not an amber artifact")
    out["source_report"] = doc.get("report")
    out["report"] = _report(config, [])
    return out


_DISPATCH = {
    "validate": _validate,
    "aggregate": _aggregate,
    "qa-rank": _qa_rank,
    "convert": _convert,
    "divergence": _divergence,
    "report": _report_cmd,
}


def run_pipeline(config: PipelineConfig) -> dict:
    logger.info("running %s on %s", config.command, ", ".join(config.inputs))
    return _DISPATCH[config.command](config)
