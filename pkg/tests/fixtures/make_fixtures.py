"""Regenerate the bundled fixture corpus.

Run from this directory.  The qa-rank oracle is computed here with plain
Python loops straight from the CSV text, independent of the amber code, and
frozen into ``qa_rank_oracle.json``.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent
PERIOD = 0.5
DURATION = 30.0
ANNOTATORS = ("a1", "a2", "a3", "a4")
LAGS = (0.0, 1.0, 1.0, 1.0)
SCALES = (1.0, 0.8, 1.2, 0.9)
OFFSETS = (0.0, 0.1, -0.05, 0.05)
SEGMENTS = [("s1", 2.0, 6.0), ("s2", 8.0, 12.0), ("s3", 14.0, 18.0), ("s4", 20.0, 24.0), ("s5", 25.0, 29.0)]
THRESHOLD = 0.05
AGREEMENT = 0.75


def content(attribute, t):
    if attribute == "valence":
        return 0.6 * math.sin(2 * math.pi * t / 20.0)
    return 0.5 * math.cos(2 * math.pi * t / 15.0)


def write_scheme():
    scheme = {
        "format_version": 1,
        "name": "dimensional",
        "constraint": {"kind": "none"},
        "time_constant": False,
        "descriptors": [
            {"name": "valence", "kind": "numerical", "levels": [], "bounds": [-1.0, 1.0],
             "numeric_map": {"type": "affine", "target": [-1.0, 1.0]}},
            {"name": "arousal", "kind": "numerical", "levels": [], "bounds": [-1.0, 1.0],
             "numeric_map": {"type": "affine", "target": [-1.0, 1.0]}},
        ],
    }
    (HERE / "scheme.json").write_text(json.dumps(scheme, indent=2) + "\n")

    cats = ["Anger", "Sadness", "Happiness", "Neutral"]
    emotions = {
        "format_version": 1,
        "name": "emotions",
        "constraint": {"kind": "blended", "p": 0.3, "q": 0.7},
        "time_constant": True,
        "descriptors": [
            {"name": c, "kind": "categorical", "levels": ["ABSENT", "PRESENT"], "bounds": None, "numeric_map": None}
            for c in cats
        ],
    }
    (HERE / "emotions_scheme.json").write_text(json.dumps(emotions, indent=2) + "\n")
    blended = {
        "format_version": 1,
        "scheme": "emotions",
        "descriptors": {
            "Anger": {"variant": "FiniteSupport", "descriptor": "Anger", "weights": [["PRESENT", 0.7]]},
            "Sadness": {"variant": "FiniteSupport", "descriptor": "Sadness", "weights": [["PRESENT", 0.3]]},
            "Happiness": {"variant": "PointMass", "descriptor": "Happiness", "element": "ABSENT"},
            "Neutral": {"variant": "PointMass", "descriptor": "Neutral", "element": "ABSENT"},
        },
    }
    (HERE / "blended.json").write_text(json.dumps(blended, indent=2) + "\n")


def write_traces():
    rng = np.random.default_rng(20240601)
    n = int(round(DURATION / PERIOD)) + 1
    with open(HERE / "traces.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "annotator", "attribute", "value"])
        for attribute in ("valence", "arousal"):
            for a, lag, scale, offset in zip(ANNOTATORS, LAGS, SCALES, OFFSETS):
                noise = rng.normal(0.0, 0.03, n)
                for k in range(n):
                    t = round(k * PERIOD, 3)
                    v = scale * content(attribute, t - lag) + offset + noise[k]
                    v = min(1.0, max(-1.0, v))
                    w.writerow([f"{t:g}", a, attribute, f"{v:.4f}"])
    with open(HERE / "segments.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["segment_id", "start_s", "end_s"])
        for sid, s, e in SEGMENTS:
            w.writerow([sid, f"{s:g}", f"{e:g}"])


def brute_force_oracle(attribute="valence"):
    rows = {}
    with open(HERE / "traces.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["attribute"] == attribute:
                rows.setdefault(row["annotator"], []).append((float(row["time_s"]), float(row["value"])))
    T = len(SEGMENTS)
    trends = {}
    for a, samples in rows.items():
        means = []
        for _, s, e in SEGMENTS:
            vals = [v for t, v in samples if s <= t < e]
            means.append(sum(vals) / len(vals))
        grid = []
        for i in range(T):
            line = []
            for j in range(T):
                d = means[j] - means[i]
                line.append("RISE" if d > THRESHOLD else "FALL" if d < -THRESHOLD else "SAME")
            grid.append(line)
        trends[a] = grid
    n = len(trends)
    matrix = []
    for i in range(T):
        line = []
        for j in range(T):
            if i == j:
                line.append("SAME")
                continue
            votes = [trends[a][i][j] for a in trends]
            winner = "NO_AGREEMENT"
            for outcome in ("SAME", "RISE", "FALL"):
                if votes.count(outcome) >= AGREEMENT * n:
                    winner = outcome
            line.append(winner)
        matrix.append(line)
    scores = [sum(1 for x in matrix[i] if x == "FALL") - sum(1 for x in matrix[i] if x == "RISE") for i in range(T)]
    order = sorted(range(T), key=lambda i: (-scores[i], i))
    decided = sum(1 for i in range(T) for j in range(T) if i != j and matrix[i][j] != "NO_AGREEMENT")
    oracle = {
        "attribute": attribute,
        "threshold": THRESHOLD,
        "agreement": AGREEMENT,
        "matrix": matrix,
        "order": [SEGMENTS[i][0] for i in order],
        "scores": {SEGMENTS[i][0]: scores[i] for i in range(T)},
        "coverage": decided / (T * (T - 1)),
    }
    (HERE / "qa_rank_oracle.json").write_text(json.dumps(oracle, indent=2) + "\n")


if __name__ == "__main__":
    write_scheme()
    write_traces()
    brute_force_oracle()
