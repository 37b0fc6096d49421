"""Sparse feature extraction.

A feature vector is a plain ``dict`` mapping a namespaced name to a non-zero
float. Names are ``family:detail``; the family encodes the extractor (and,
for cluster features, the number of clusters), e.g. ``ng2:not_good``,
``cg3:goo``, ``lex:bingliu:sum``, ``clus500:17`` or ``clus500[-1]:17``.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from .textprep import PUNCTUATION

SparseFeatureVector = dict[str, float]

OOV = "oov"
BOS = "<s>"
EOS = "</s>"

_CLUSTER_FAMILY = re.compile(r"^clus(\d+)(?:\[([+-]?\d+)\])?$")


class ClusterLookup(Protocol):
    k: int

    def cluster_of(self, word: str) -> int | None: ...


@dataclass(frozen=True)
class SentimentLexicon:
    name: str
    polarity: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name or ":" in self.name:
            raise ValueError(f"invalid lexicon name {self.name!r}")
        for word, score in self.polarity.items():
            if not math.isfinite(score):
                raise ValueError(f"non-finite score for {word!r}")


def load_sentiment_lexicon(path, name: str | None = None) -> SentimentLexicon:
    """Read a ``word<TAB>score`` file. Lines starting with ``#`` are skipped."""
    polarity: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected word<TAB>score")
            try:
                polarity[parts[0]] = float(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: score {parts[1]!r} is not a number") from None
    if name is None:
        from pathlib import Path
        name = Path(path).stem
    return SentimentLexicon(name, polarity)


def _counts(prefix: str, items: Iterable[str]) -> SparseFeatureVector:
    return {f"{prefix}:{item}": float(c) for item, c in Counter(items).items()}


def ngram_features(tokens: list[str], n_range: tuple[int, int] = (1, 3)) -> SparseFeatureVector:
    """Counts of contiguous word n-grams, tokens joined with ``_``."""
    lo, hi = n_range
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid n-gram range {n_range}")
    feats: SparseFeatureVector = {}
    for n in range(lo, hi + 1):
        grams = ("_".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
        feats.update(_counts(f"ng{n}", grams))
    return feats


def char_ngram_features(text: str, n_range: tuple[int, int] = (3, 5)) -> SparseFeatureVector:
    """Counts of character n-grams of ``text`` (pass the whitespace-joined tokens)."""
    lo, hi = n_range
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid n-gram range {n_range}")
    feats: SparseFeatureVector = {}
    for n in range(lo, hi + 1):
        feats.update(_counts(f"cg{n}", (text[i:i + n] for i in range(len(text) - n + 1))))
    return feats


def lexicon_features(tokens: list[str], lexicon: SentimentLexicon) -> SparseFeatureVector:
    """Five aggregates of the lexicon scores of ``tokens``.

    ``pos_count``, ``neg_count``, ``sum``, ``max`` and ``last`` (score of the
    last scored token). Aggregates equal to zero are not stored.
    """
    scores = [lexicon.polarity[t] for t in tokens if t in lexicon.polarity]
    if not scores:
        return {}
    prefix = f"lex:{lexicon.name}"
    feats = {
        f"{prefix}:pos_count": float(sum(1 for s in scores if s > 0)),
        f"{prefix}:neg_count": float(sum(1 for s in scores if s < 0)),
        f"{prefix}:sum": float(math.fsum(scores)),
        f"{prefix}:max": float(max(scores)),
        f"{prefix}:last": float(scores[-1]),
    }
    return {name: v for name, v in feats.items() if v != 0}


def _cluster_value(model: ClusterLookup, word: str) -> str:
    cid = model.cluster_of(word)
    return OOV if cid is None else str(cid)


def cluster_bag_features(tokens: list[str], model: ClusterLookup) -> SparseFeatureVector:
    """Bag of clusters: one count per cluster id, OOV tokens under ``clusK:oov``."""
    return _counts(f"clus{model.k}", (_cluster_value(model, t) for t in tokens))


def cluster_token_features(tokens: list[str], model: ClusterLookup,
                           context_window: int = 2) -> list[list[str]]:
    """Per-position categorical cluster features with a context window.

    Position ``i`` gets ``clusK[o]:<id>`` for every offset ``o`` in
    ``[-w, +w]``; positions outside the sequence use ``<s>`` / ``</s>``.
    """
    if context_window < 0:
        raise ValueError("context_window must be non-negative")
    values = [_cluster_value(model, t) for t in tokens]
    n = len(tokens)
    out = []
    for i in range(n):
        row = []
        for o in range(-context_window, context_window + 1):
            j = i + o
            v = BOS if j < 0 else EOS if j >= n else values[j]
            row.append(f"clus{model.k}[{o:+d}]:{v}")
        out.append(row)
    return out


def cluster_membership_features(tokens: list[str], model: ClusterLookup, mode: str = "bag",
                                context_window: int = 2):
    if mode == "bag":
        return cluster_bag_features(tokens, model)
    if mode == "per_token":
        return cluster_token_features(tokens, model, context_window)
    raise ValueError(f"unknown cluster feature mode {mode!r}")


def _is_punct(token: str) -> bool:
    return all(ch in PUNCTUATION or not ch.isalnum() for ch in token)


def capitalization_flags(token: str) -> list[str]:
    flags = []
    if token[:1].isupper():
        flags.append("cap:initial")
    letters = [ch for ch in token if ch.isalpha()]
    if letters and all(ch.isupper() for ch in letters):
        flags.append("cap:all_caps")
    if any(ch.isdigit() for ch in token):
        flags.append("cap:digit")
    if token and _is_punct(token):
        flags.append("cap:punct")
    return flags


def capitalization_features(tokens: list[str]) -> list[list[str]]:
    return [capitalization_flags(t) for t in tokens]


def annotation_features(pos_tags: list[str | None] | None = None,
                        gazetteers: list[Iterable[str]] | None = None,
                        length: int | None = None) -> list[list[str]]:
    """Per-token features from optional pre-annotated columns."""
    if length is None:
        length = len(pos_tags if pos_tags is not None else gazetteers or [])
    out: list[list[str]] = [[] for _ in range(length)]
    if pos_tags is not None:
        for i, tag in enumerate(pos_tags):
            if tag:
                out[i].append(f"pos:{tag}")
    if gazetteers is not None:
        for i, flags in enumerate(gazetteers):
            out[i].extend(f"gaz:{g}" for g in flags)
    return out


def combine(vectors: Iterable[SparseFeatureVector]) -> SparseFeatureVector:
    """Key-wise sum; entries that cancel to zero are dropped."""
    total: SparseFeatureVector = {}
    for vec in vectors:
        for name, value in vec.items():
            total[name] = total.get(name, 0.0) + value
    return {name: v for name, v in sorted(total.items()) if v != 0}


def binarize(vector: SparseFeatureVector) -> SparseFeatureVector:
    return {name: 1.0 for name in vector}


def parse_feature_name(name: str) -> tuple[str, int | None, str]:
    """Split a feature name into ``(family, k, detail)``; ``k`` only for cluster features."""
    family, sep, detail = name.partition(":")
    if not sep or not family:
        raise ValueError(f"feature name {name!r} is not namespaced")
    m = _CLUSTER_FAMILY.match(family)
    return family, (int(m.group(1)) if m else None), detail


def is_cluster_feature(name: str) -> bool:
    return _CLUSTER_FAMILY.match(name.partition(":")[0]) is not None


@dataclass(frozen=True)
class SentenceFeatureConfig:
    """Which feature families to extract for a sentence-level task."""

    ngrams: bool = True
    ngram_range: tuple[int, int] = (1, 3)
    char_ngrams: bool = True
    char_range: tuple[int, int] = (3, 5)
    lexicons: bool = True
    clusters: bool = True
    binary: bool = False


def sentence_features(tokens: list[str], config: SentenceFeatureConfig,
                      lexicons: Iterable[SentimentLexicon] = (),
                      cluster_models: Iterable[ClusterLookup] = ()) -> SparseFeatureVector:
    parts = []
    if config.ngrams:
        parts.append(ngram_features(tokens, config.ngram_range))
    if config.char_ngrams:
        parts.append(char_ngram_features(" ".join(tokens), config.char_range))
    if config.binary:
        parts = [binarize(p) for p in parts]
    if config.lexicons:
        parts.extend(lexicon_features(tokens, lex) for lex in lexicons)
    if config.clusters:
        parts.extend(cluster_bag_features(tokens, m) for m in cluster_models)
    return combine(parts)
