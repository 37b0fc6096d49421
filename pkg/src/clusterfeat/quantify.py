"""Classify-and-count prevalence estimation and Earth Mover's Distance."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import linmodel
from .features import SparseFeatureVector
from .linmodel import LinearModel
from .sentiment import DEFAULT_SCALE, OrdinalScale


@dataclass(frozen=True)
class PrevalenceVector:
    scale: OrdinalScale
    p: tuple[float, ...]

    def __post_init__(self):
        if len(self.p) != len(self.scale):
            raise ValueError(f"{len(self.p)} prevalences for a {len(self.scale)}-class scale")
        if any(not math.isfinite(v) or v < 0 for v in self.p):
            raise ValueError("prevalences must be finite and non-negative")
        if abs(math.fsum(self.p) - 1.0) > 1e-9:
            raise ValueError(f"prevalences sum to {math.fsum(self.p)}, not 1")

    def __getitem__(self, label) -> float:
        return self.p[self.scale.rank(label)]

    @classmethod
    def from_labels(cls, labels: Iterable[str], scale: OrdinalScale = DEFAULT_SCALE) -> "PrevalenceVector":
        labels = list(labels)
        if not labels:
            raise ValueError("prevalence of an empty set is undefined")
        counts = Counter(scale.rank(y) for y in labels)
        return cls(scale, tuple(counts[i] / len(labels) for i in range(len(scale))))


def classify_and_count(model: LinearModel, items: Sequence[SparseFeatureVector],
                       scale: OrdinalScale = DEFAULT_SCALE, probabilistic: bool = False) -> PrevalenceVector:
    """Prevalence estimate from the model's hard decisions on ``items``.

    With ``probabilistic=True`` the per-item class probabilities are averaged
    instead of counting argmax decisions.
    """
    if not items:
        raise ValueError("cannot quantify an empty item set")
    if not probabilistic:
        return PrevalenceVector.from_labels((linmodel.predict(model, x) for x in items), scale)
    order = [list(model.classes).index(c) for c in scale.classes]
    mean = np.mean([linmodel.predict_proba(model, x)[order] for x in items], axis=0)
    return PrevalenceVector(scale, tuple(float(v) for v in mean / mean.sum()))


def emd(p: PrevalenceVector, q: PrevalenceVector) -> float:
    """Earth Mover's Distance between two prevalence vectors on an ordinal scale.

    With unit distance between consecutive classes this is the sum, over the
    first ``|C| - 1`` classes, of the absolute difference of cumulative sums.
    """
    if p.scale != q.scale:
        raise ValueError("prevalence vectors are on different scales")
    total = 0.0
    cp = cq = 0.0
    for a, b in zip(p.p[:-1], q.p[:-1]):
        cp += a
        cq += b
        total += abs(cq - cp)
    return total


@dataclass
class SubjectResult:
    subject: str
    estimate: PrevalenceVector
    gold: PrevalenceVector
    emd: float
    n_items: int


def quantify_by_subject(model: LinearModel, groups: Mapping[str, Sequence[tuple[SparseFeatureVector, str]]],
                        scale: OrdinalScale = DEFAULT_SCALE,
                        probabilistic: bool = False) -> tuple[dict[str, SubjectResult], float]:
    """Classify-and-count for each subject; returns per-subject results and the mean EMD.

    ``groups`` maps a subject to its ``(features, gold label)`` items.
    """
    if not groups:
        raise ValueError("no subjects to quantify")
    results = {}
    for subject in sorted(groups):
        items = groups[subject]
        if not items:
            raise ValueError(f"subject {subject!r} has no items")
        est = classify_and_count(model, [x for x, _ in items], scale, probabilistic)
        gold = PrevalenceVector.from_labels((y for _, y in items), scale)
        results[subject] = SubjectResult(subject, est, gold, emd(gold, est), len(items))
    mean = math.fsum(r.emd for r in results.values()) / len(results)
    return results, mean


def write_quantification_tsv(results: Mapping[str, SubjectResult], path) -> None:
    """Rows ``subject<TAB>p1..pC<TAB>emd`` in subject order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for subject in sorted(results):
            r = results[subject]
            fh.write("\t".join([subject, *(repr(v) for v in r.estimate.p), repr(r.emd)]) + "\n")
