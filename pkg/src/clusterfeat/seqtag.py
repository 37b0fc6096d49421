"""BIO named-entity tagging with a greedy left-to-right history tagger.

Training sees the gold previous tag as a feature; decoding feeds back the
tag it just predicted. Segmentation is the same task with every entity type
collapsed into one generic type.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import linmodel
from .features import (
    BOS,
    EOS,
    ClusterLookup,
    annotation_features,
    capitalization_features,
    cluster_token_features,
)
from .linmodel import TrainConfig

OUTSIDE = "O"
GENERIC_TYPE = "ENT"


class TaggingError(ValueError):
    pass


@dataclass(frozen=True)
class TagScheme:
    entity_types: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.entity_types)) != len(self.entity_types):
            raise ValueError("duplicate entity types")
        if any(not t or "\t" in t for t in self.entity_types):
            raise ValueError("invalid entity type name")

    @property
    def labels(self) -> tuple[str, ...]:
        return (OUTSIDE,) + tuple(f"{p}-{t}" for t in self.entity_types for p in "BI")

    @classmethod
    def from_tags(cls, tags: Iterable[str]) -> "TagScheme":
        types = sorted({split_tag(t)[1] for t in tags if t != OUTSIDE})
        return cls(tuple(types))


SEGMENTATION = TagScheme((GENERIC_TYPE,))


def split_tag(tag: str) -> tuple[str, str | None]:
    if tag == OUTSIDE:
        return OUTSIDE, None
    prefix, sep, etype = tag.partition("-")
    if not sep or prefix not in ("B", "I") or not etype:
        raise TaggingError(f"invalid BIO tag {tag!r}")
    return prefix, etype


@dataclass(frozen=True)
class EntitySpan:
    start: int
    end: int
    entity_type: str

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")


@dataclass
class TaggedSequence:
    tokens: list[str]
    tags: list[str]
    pos: list[str | None] | None = None
    gazetteers: list[tuple[str, ...]] | None = None

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise TaggingError(f"{len(self.tokens)} tokens but {len(self.tags)} tags")
        for col in (self.pos, self.gazetteers):
            if col is not None and len(col) != len(self.tokens):
                raise TaggingError("annotation column length differs from token count")


def decode_bio(tagged) -> list[EntitySpan]:
    """Spans of maximal ``B-t I-t*`` runs in a tag list or :class:`TaggedSequence`.

    An ``I-t`` that does not continue a span of type ``t`` opens a new span.
    """
    tags = _tags_of(tagged)
    spans = []
    start, current = None, None
    for i, tag in enumerate(tags):
        prefix, etype = split_tag(tag)
        if prefix == "I" and current == etype:
            continue
        if current is not None:
            spans.append(EntitySpan(start, i, current))
            start, current = None, None
        if prefix != OUTSIDE:
            start, current = i, etype
    if current is not None:
        spans.append(EntitySpan(start, len(tags), current))
    return spans


def encode_bio(spans: Sequence[EntitySpan], length: int,
               scheme: TagScheme | None = None) -> list[str]:
    tags = [OUTSIDE] * length
    last_end = 0
    for span in sorted(spans, key=lambda s: (s.start, s.end)):
        if span.start < last_end:
            raise TaggingError(f"overlapping span {span}")
        if span.end > length:
            raise TaggingError(f"span {span} exceeds sequence length {length}")
        if scheme is not None and span.entity_type not in scheme.entity_types:
            raise TaggingError(f"entity type {span.entity_type!r} not in scheme")
        tags[span.start] = f"B-{span.entity_type}"
        for i in range(span.start + 1, span.end):
            tags[i] = f"I-{span.entity_type}"
        last_end = span.end
    return tags


def collapse_types(tags: Sequence[str], generic: str = GENERIC_TYPE) -> list[str]:
    return [t if t == OUTSIDE else f"{t[0]}-{generic}" for t in tags]


def repair_transition(prev: str, tag: str) -> str:
    """Turn an ``I-t`` that cannot follow ``prev`` into ``B-t``."""
    prefix, etype = split_tag(tag)
    if prefix == "I" and (prev == OUTSIDE or prev == BOS or split_tag(prev)[1] != etype):
        return f"B-{etype}"
    return tag


@dataclass(frozen=True)
class TaggerFeatureConfig:
    words: bool = True
    word_window: int = 1
    capitalization: bool = True
    clusters: bool = True
    cluster_window: int = 2
    annotations: bool = True
    history: bool = True


def _static_features(seq: TaggedSequence, config: TaggerFeatureConfig,
                     cluster_models: Sequence[ClusterLookup]) -> list[list[str]]:
    """Features of each position that do not depend on predicted tags."""
    toks = seq.tokens
    n = len(toks)
    feats: list[list[str]] = [["bias"] for _ in range(n)]
    if config.words:
        w = config.word_window
        lower = [t.lower() for t in toks]

        def at(j):
            return BOS if j < 0 else EOS if j >= n else lower[j]

        for i in range(n):
            feats[i].extend(f"w[{o:+d}]:{at(i + o)}" for o in range(-w, w + 1))
            feats[i].append(f"bg[-1]:{at(i - 1)}_{at(i)}")
            feats[i].append(f"bg[+1]:{at(i)}_{at(i + 1)}")
            feats[i].append(f"suf3:{lower[i][-3:]}")
    if config.capitalization:
        caps = capitalization_features(toks)
        for i in range(n):
            feats[i].extend(caps[i])
            if i > 0:
                feats[i].extend(f"prev_{c}" for c in caps[i - 1])
    if config.clusters:
        for model in cluster_models:
            for i, row in enumerate(cluster_token_features(toks, model, config.cluster_window)):
                feats[i].extend(row)
    if config.annotations and (seq.pos is not None or seq.gazetteers is not None):
        for i, row in enumerate(annotation_features(seq.pos, seq.gazetteers, n)):
            feats[i].extend(row)
    return feats


def _position_vector(static: list[str], prev_tag: str, history: bool) -> dict[str, float]:
    vec = dict.fromkeys(static, 1.0)
    if history:
        vec[f"prev:{prev_tag}"] = 1.0
    return vec


@dataclass
class TaggerModel:
    scheme: TagScheme
    classifier: linmodel.LinearModel
    feature_config: TaggerFeatureConfig
    cluster_models: list = field(default_factory=list)


def train_tagger(sequences: Sequence[TaggedSequence], config: TrainConfig = TrainConfig(),
                 feature_config: TaggerFeatureConfig = TaggerFeatureConfig(),
                 cluster_models: Sequence[ClusterLookup] = (),
                 scheme: TagScheme | None = None) -> TaggerModel:
    """Train the per-position classifier on gold-history features.

    Raises:
        ValueError: for an empty corpus or tags outside ``scheme``.
    """
    if not sequences:
        raise ValueError("empty training corpus")
    if scheme is None:
        scheme = TagScheme.from_tags(t for s in sequences for t in s.tags)
        if not scheme.entity_types:
            scheme = SEGMENTATION
    labels = set(scheme.labels)
    dataset = []
    for seq in sequences:
        bad = set(seq.tags) - labels
        if bad:
            raise TaggingError(f"tags {sorted(bad)} are not in the scheme")
        static = _static_features(seq, feature_config, cluster_models)
        prev = BOS
        for feats, tag in zip(static, seq.tags):
            dataset.append((_position_vector(feats, prev, feature_config.history), tag))
            prev = tag
    present = {y for _, y in dataset}
    if len(present) < 2:
        # one-label corpus: add a never-active anchor so the learner is defined
        filler = next(lab for lab in scheme.labels if lab not in present)
        dataset.append(({"__anchor__": 1.0}, filler))
    classifier = linmodel.train(dataset, config, classes=scheme.labels)
    return TaggerModel(scheme, classifier, feature_config, list(cluster_models))


def tag(model: TaggerModel, tokens: Sequence[str], pos=None, gazetteers=None) -> TaggedSequence:
    """Greedy decoding; an illegal ``I-t`` is emitted as ``B-t``."""
    seq = TaggedSequence(list(tokens), [OUTSIDE] * len(tokens), pos, gazetteers)
    static = _static_features(seq, model.feature_config, model.cluster_models)
    prev = BOS
    out = []
    for feats in static:
        label = linmodel.predict(model.classifier,
                                 _position_vector(feats, prev, model.feature_config.history))
        label = repair_transition(prev, label)
        out.append(label)
        prev = label
    seq.tags = out
    return seq


def tag_corpus(model: TaggerModel, sequences: Sequence[TaggedSequence]) -> list[TaggedSequence]:
    return [tag(model, s.tokens, s.pos, s.gazetteers) for s in sequences]


def _tags_of(item) -> Sequence[str]:
    return item.tags if isinstance(item, TaggedSequence) else item


def entity_f1(gold: Sequence, pred: Sequence, ignore_types: bool = False) -> tuple[float, float, float]:
    """Exact-match span precision, recall and F1 over a corpus.

    A predicted span is correct iff start, end and type all match a gold
    span (bounds only with ``ignore_types``). Empty denominators give 0.
    """
    if len(gold) != len(pred):
        raise TaggingError(f"{len(gold)} gold sequences but {len(pred)} predicted")
    tp = n_pred = n_gold = 0
    for g, p in zip(gold, pred):
        gt, pt = _tags_of(g), _tags_of(p)
        if len(gt) != len(pt):
            raise TaggingError("gold and predicted sequences differ in length")
        gs, ps = set(decode_bio(gt)), set(decode_bio(pt))
        if ignore_types:
            gs = {(s.start, s.end) for s in gs}
            ps = {(s.start, s.end) for s in ps}
        tp += len(gs & ps)
        n_gold += len(gs)
        n_pred += len(ps)
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def read_conll(path) -> list[TaggedSequence]:
    """Read ``surface<TAB>tag[<TAB>pos][<TAB>gazetteer-flags]`` lines.

    Sequences are separated by blank lines. Gazetteer flags are
    comma-separated; ``-`` or an empty column means none.
    """
    sequences = []
    rows: list[list[str]] = []

    def flush(lineno):
        if not rows:
            return
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise TaggingError(f"{path}:{lineno}: inconsistent column count within a sequence")
        width = widths.pop()
        tokens = [r[0] for r in rows]
        tags = [r[1] for r in rows]
        for t in tags:
            split_tag(t)
        pos = [r[2] or None for r in rows] if width >= 3 else None
        gaz = None
        if width >= 4:
            gaz = [tuple(g for g in r[3].split(",") if g and g != "-") for r in rows]
        sequences.append(TaggedSequence(tokens, tags, pos, gaz))
        rows.clear()

    with open(path, encoding="utf-8") as fh:
        lineno = 0
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                flush(lineno)
                continue
            parts = line.split("\t")
            if len(parts) < 2 or len(parts) > 4 or not parts[0]:
                raise TaggingError(f"{path}:{lineno}: expected 2-4 tab-separated columns")
            rows.append(parts)
        flush(lineno)
    return sequences


def write_conll(sequences: Iterable[TaggedSequence], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for seq in sequences:
            for i, (tok, t) in enumerate(zip(seq.tokens, seq.tags)):
                cols = [tok, t]
                if seq.pos is not None or seq.gazetteers is not None:
                    cols.append((seq.pos[i] if seq.pos else None) or "")
                if seq.gazetteers is not None:
                    cols.append(",".join(seq.gazetteers[i]) or "-")
                fh.write("\t".join(cols) + "\n")
            fh.write("\n")
