"""Five-point ordinal sentiment classification and macro-averaged MAE."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import linmodel
from .features import (
    ClusterLookup,
    SentenceFeatureConfig,
    SentimentLexicon,
    SparseFeatureVector,
    sentence_features,
)
from .linmodel import LinearModel, TrainConfig
from .textprep import SENTIMENT_RULES, PreprocessRules, preprocess

log = logging.getLogger(__name__)

FIVE_POINT = ("VeryNegative", "Negative", "Neutral", "Positive", "VeryPositive")


@dataclass(frozen=True)
class OrdinalScale:
    classes: tuple[str, ...] = FIVE_POINT

    def __post_init__(self):
        if len(self.classes) < 2 or len(set(self.classes)) != len(self.classes):
            raise ValueError("an ordinal scale needs at least two distinct classes")

    @property
    def index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.classes)}

    def __len__(self):
        return len(self.classes)

    def rank(self, label) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise ValueError(f"label {label!r} is not on the scale {self.classes}") from None

    def normalize(self, label: str) -> str:
        """Accept a class name or a centred integer (``-2..2`` on five points)."""
        if label in self.classes:
            return label
        try:
            r = int(label) + (len(self.classes) - 1) // 2
        except ValueError:
            raise ValueError(f"unknown label {label!r}") from None
        if not 0 <= r < len(self.classes) or len(self.classes) % 2 == 0:
            raise ValueError(f"label {label!r} is outside the scale")
        return self.classes[r]


DEFAULT_SCALE = OrdinalScale()


def per_class_mae(gold: Sequence, pred: Sequence, scale: OrdinalScale = DEFAULT_SCALE) -> dict:
    """Mean absolute rank error for each class present in ``gold``."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold labels but {len(pred)} predictions")
    if not gold:
        raise ValueError("empty input")
    totals: dict[str, list[int]] = {}
    for g, p in zip(gold, pred):
        err = abs(scale.rank(p) - scale.rank(g))
        totals.setdefault(g, []).append(err)
    return {c: sum(totals[c]) / len(totals[c]) for c in scale.classes if c in totals}


def mae_macro(gold: Sequence, pred: Sequence, scale: OrdinalScale = DEFAULT_SCALE) -> float:
    """Macro-averaged mean absolute error over the ordinal ranks.

    Per gold class, the mean of ``|rank(pred) - rank(gold)|``; then the
    unweighted mean over classes. Classes absent from ``gold`` are skipped
    with a warning.
    """
    per_class = per_class_mae(gold, pred, scale)
    missing = [c for c in scale.classes if c not in per_class]
    if missing:
        log.warning("classes absent from gold, skipped in MAE^M: %s", ", ".join(missing))
    return sum(per_class.values()) / len(per_class)


@dataclass(frozen=True)
class SentimentItem:
    id: str
    subject: str
    label: str
    text: str


def read_sentiment_tsv(path, scale: OrdinalScale = DEFAULT_SCALE) -> list[SentimentItem]:
    """Read ``id<TAB>subject<TAB>label<TAB>text`` rows (an ``id`` header row is skipped)."""
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t", 3)
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected id, subject, label, text columns")
            if lineno == 1 and parts[0] == "id" and parts[2] == "label":
                continue
            try:
                label = scale.normalize(parts[2])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            items.append(SentimentItem(parts[0], parts[1], label, parts[3]))
    return items


def write_sentiment_tsv(items: Sequence[SentimentItem], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for it in items:
            fh.write(f"{it.id}\t{it.subject}\t{it.label}\t{it.text}\n")


@dataclass
class SentimentFeaturizer:
    """Preprocessing plus sentence-level feature families."""

    config: SentenceFeatureConfig = SentenceFeatureConfig()
    rules: PreprocessRules = SENTIMENT_RULES
    lexicons: list[SentimentLexicon] = field(default_factory=list)
    cluster_models: list[ClusterLookup] = field(default_factory=list)

    def __call__(self, text: str) -> SparseFeatureVector:
        tokens = preprocess(text, self.rules).split()
        return sentence_features(tokens, self.config, self.lexicons, self.cluster_models)

    def describe(self) -> dict:
        d = {f"features.{k}": v for k, v in asdict(self.config).items()}
        d.update({f"preprocess.{k}": v for k, v in asdict(self.rules).items()})
        d["lexicons"] = ",".join(lex.name for lex in self.lexicons)
        d["cluster_k"] = ",".join(str(m.k) for m in self.cluster_models)
        return d


def fingerprint(config: dict) -> str:
    canon = "\n".join(f"{k}={config[k]}" for k in sorted(config))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@dataclass
class SentimentRun:
    model: LinearModel
    predictions: list[str]
    score: float
    report: dict


def run_sentiment_pipeline(train_items: Sequence[SentimentItem], test_items: Sequence[SentimentItem],
                           featurizer: SentimentFeaturizer = None,
                           train_config: TrainConfig = TrainConfig(),
                           scale: OrdinalScale = DEFAULT_SCALE) -> SentimentRun:
    """Featurize, train logistic regression, predict the test items and score MAE^M."""
    featurizer = featurizer or SentimentFeaturizer()
    data = [(featurizer(it.text), it.label) for it in train_items]
    model = linmodel.train(data, train_config, classes=scale.classes)
    preds = [linmodel.predict(model, featurizer(it.text)) for it in test_items]
    score = mae_macro([it.label for it in test_items], preds, scale)
    config = featurizer.describe()
    config.update({f"train.{k}": v for k, v in asdict(train_config).items()})
    report = {
        "task": "sent-class",
        "config_fingerprint": fingerprint(config),
        **config,
        "n_train": len(train_items),
        "n_test": len(test_items),
        "n_features": len(model.feature_index),
        "mae_macro": repr(score),
    }
    return SentimentRun(model, preds, score, report)


def write_report(report: dict, path) -> None:
    """Flat ``key=value`` lines in insertion order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in report.items():
            fh.write(f"{key}={value}\n")


def read_report(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            key, sep, value = line.rstrip("\n").partition("=")
            if sep:
                out[key] = value
    return out
