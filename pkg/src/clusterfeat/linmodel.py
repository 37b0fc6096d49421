"""Multinomial logistic regression over sparse feature dicts, trained with SGD.

Objective for ``N`` training pairs ``(x_i, y_i)``::

    J(W, b) = 1/N * sum_i -log softmax(W x_i + b)[y_i]  +  l2 / (2N) * ||W||^2

The bias is not regularized. Each SGD step uses the single-example gradient
``grad CE_i + (l2/N) W`` whose mean over the data is ``grad J``. The L2 shrink
is applied through a scalar multiplier so a step only touches the columns of
features active in the example.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .features import SparseFeatureVector

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

# rescale the weight matrix when the lazy L2 multiplier gets this small
_MIN_SCALE = 1e-9


@dataclass(frozen=True)
class TrainConfig:
    l2_strength: float = 1.0
    epochs: int = 50
    learning_rate: float = 0.1
    decay: float = 1e-4
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.l2_strength < 0:
            raise ValueError("l2_strength must be non-negative")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.learning_rate <= 0 or self.decay < 0:
            raise ValueError("learning rate must be positive and decay non-negative")

    def rate(self, step: int) -> float:
        return self.learning_rate / (1.0 + self.decay * step)


@dataclass(eq=False)
class LinearModel:
    classes: tuple
    feature_index: dict[str, int]
    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)
    objective: float | None = None
    history: list[float] = field(default_factory=list)

    def __post_init__(self):
        n_cls, n_feat = len(self.classes), len(self.feature_index)
        if self.weights.shape != (n_cls, n_feat) or self.bias.shape != (n_cls,):
            raise ValueError("weight shapes do not match classes x features")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("non-finite weights")

    def encode(self, vector: SparseFeatureVector) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and values of the known features of ``vector``."""
        idx, val = [], []
        for name, v in vector.items():
            j = self.feature_index.get(name)
            if j is not None:
                idx.append(j)
                val.append(v)
        return np.asarray(idx, dtype=np.int64), np.asarray(val, dtype=np.float64)

    def scores(self, vector: SparseFeatureVector) -> np.ndarray:
        idx, val = self.encode(vector)
        return self.weights[:, idx] @ val + self.bias


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - np.max(z))
    return e / e.sum()


def predict_proba(model: LinearModel, vector: SparseFeatureVector) -> np.ndarray:
    """Class probabilities in ``model.classes`` order. Unknown features are ignored."""
    return softmax(model.scores(vector))


def predict(model: LinearModel, vector: SparseFeatureVector):
    # np.argmax returns the first maximum, i.e. the earliest class on ties
    return model.classes[int(np.argmax(predict_proba(model, vector)))]


def _encode_dataset(dataset, feature_index, class_index):
    rows = []
    for vector, label in dataset:
        idx = np.fromiter((feature_index[n] for n in vector), dtype=np.int64, count=len(vector))
        val = np.fromiter(vector.values(), dtype=np.float64, count=len(vector))
        rows.append((idx, val, class_index[label]))
    return rows


def _objective(rows, weights, bias, l2, n) -> float:
    total = 0.0
    for idx, val, y in rows:
        z = weights[:, idx] @ val + bias
        m = np.max(z)
        total += m + np.log(np.exp(z - m).sum()) - z[y]
    return total / n + l2 / (2 * n) * float(np.sum(weights * weights))


def objective(model: LinearModel, dataset: Sequence[tuple[SparseFeatureVector, Hashable]],
              l2_strength: float) -> float:
    """Regularized mean cross-entropy of ``model`` on ``dataset``."""
    class_index = {c: i for i, c in enumerate(model.classes)}
    rows = [(*model.encode(v), class_index[y]) for v, y in dataset]
    return _objective(rows, model.weights, model.bias, l2_strength, len(rows))


def train(dataset: Sequence[tuple[SparseFeatureVector, Hashable]], config: TrainConfig = TrainConfig(),
          classes: Sequence | None = None) -> LinearModel:
    """Fit a multinomial logistic regression by plain SGD.

    Args:
        dataset: ``(feature dict, label)`` pairs.
        config: optimizer settings; the step size at update ``t`` is
            ``learning_rate / (1 + decay * t)``.
        classes: class order; defaults to the sorted distinct labels.

    Raises:
        ValueError: if the dataset is empty, has fewer than two distinct
            labels, or contains a label outside ``classes``.
    """
    if not dataset:
        raise ValueError("empty training set")
    labels = [y for _, y in dataset]
    distinct = set(labels)
    if len(distinct) < 2:
        raise ValueError("training set needs at least two distinct labels")
    if classes is None:
        classes = sorted(distinct)
    classes = tuple(classes)
    class_index = {c: i for i, c in enumerate(classes)}
    unknown = distinct - set(class_index)
    if unknown:
        raise ValueError(f"labels not in class list: {sorted(map(str, unknown))}")

    names = sorted({name for vector, _ in dataset for name in vector})
    feature_index = {name: j for j, name in enumerate(names)}
    rows = _encode_dataset(dataset, feature_index, class_index)
    n = len(rows)
    n_cls = len(classes)

    # weights = scale * V
    V = np.zeros((n_cls, len(names)))
    scale = 1.0
    bias = np.zeros(n_cls)
    shrink = config.l2_strength / n
    rng = np.random.default_rng(config.seed)
    order = np.arange(n)
    history: list[float] = []
    step = 0
    for epoch in range(config.epochs):
        if config.shuffle:
            order = rng.permutation(n)
        for i in order:
            idx, val, y = rows[i]
            eta = config.rate(step)
            step += 1
            z = scale * (V[:, idx] @ val) + bias
            p = np.exp(z - z.max())
            p /= p.sum()
            p[y] -= 1.0
            # W <- (1 - eta*l2/N) W - eta * outer(p - onehot, x)
            scale *= 1.0 - eta * shrink
            if scale < _MIN_SCALE:
                V *= scale
                scale = 1.0
            V[:, idx] -= (eta / scale) * np.outer(p, val)
            bias -= eta * p
        history.append(_objective(rows, scale * V, bias, config.l2_strength, n))
        log.debug("epoch %d objective %.6f", epoch + 1, history[-1])

    weights = scale * V
    final = _objective(rows, weights, bias, config.l2_strength, n)
    log.info("trained %d classes x %d features, objective %.6f", n_cls, len(names), final)
    return LinearModel(classes, feature_index, weights, bias, final, history)


def gradient(model: LinearModel, dataset, l2_strength: float) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of the regularized objective w.r.t. ``(weights, bias)``."""
    class_index = {c: i for i, c in enumerate(model.classes)}
    n = len(dataset)
    gw = np.zeros_like(model.weights)
    gb = np.zeros_like(model.bias)
    for vector, label in dataset:
        idx, val = model.encode(vector)
        p = predict_proba(model, vector)
        p[class_index[label]] -= 1.0
        np.add.at(gw, (slice(None), idx), np.outer(p, val))
        gb += p
    return gw / n + (l2_strength / n) * model.weights, gb / n


def gradient_check(model: LinearModel, dataset, epsilon: float = 1e-5,
                   l2_strength: float = 1.0) -> float:
    """Max relative error between the analytic gradient and central differences.

    Every weight and bias coordinate is perturbed by ``+-epsilon``; the
    relative error of a coordinate is ``|a - f| / max(|a|, |f|, 1e-8)``.
    """
    gw, gb = gradient(model, dataset, l2_strength)
    class_index = {c: i for i, c in enumerate(model.classes)}
    rows = [(*model.encode(v), class_index[y]) for v, y in dataset]
    W = model.weights.astype(np.float64, copy=True)
    b = model.bias.astype(np.float64, copy=True)
    n = len(rows)

    def f():
        return _objective(rows, W, b, l2_strength, n)

    worst = 0.0
    for target, analytic in ((W, gw), (b, gb)):
        for pos in np.ndindex(target.shape):
            orig = target[pos]
            target[pos] = orig + epsilon
            up = f()
            target[pos] = orig - epsilon
            down = f()
            target[pos] = orig
            fd = (up - down) / (2 * epsilon)
            a = analytic[pos]
            worst = max(worst, abs(a - fd) / max(abs(a), abs(fd), 1e-8))
    return worst


def save_model(model: LinearModel, path) -> None:
    """Write a versioned, sectioned TSV. Floats use ``repr`` so reloads are exact."""
    inverse = sorted(model.feature_index.items(), key=lambda kv: kv[1])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#linmodel\tversion={FORMAT_VERSION}\n")
        fh.write(f"[classes]\t{len(model.classes)}\n")
        for c in model.classes:
            fh.write(f"{c}\n")
        fh.write(f"[bias]\t{len(model.bias)}\n")
        fh.write("\t".join(repr(float(v)) for v in model.bias) + "\n")
        fh.write(f"[features]\t{len(inverse)}\n")
        for name, j in inverse:
            if "\t" in name or "\n" in name:
                raise ValueError(f"feature name {name!r} cannot be stored")
            fh.write(name + "\t" + "\t".join(repr(float(v)) for v in model.weights[:, j]) + "\n")


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].startswith("#linmodel"):
        raise ValueError(f"{path}: not a linmodel file")
    version = dict(kv.split("=", 1) for kv in lines[0].split("\t")[1:]).get("version")
    if version != str(FORMAT_VERSION):
        raise ValueError(f"{path}: unsupported model version {version}")
    pos = 1

    def section(name):
        nonlocal pos
        tag, count = lines[pos].split("\t")
        if tag != f"[{name}]":
            raise ValueError(f"{path}:{pos + 1}: expected section [{name}]")
        pos += 1
        return int(count)

    n_cls = section("classes")
    classes = tuple(lines[pos:pos + n_cls])
    pos += n_cls
    section("bias")
    bias = np.array([float(v) for v in lines[pos].split("\t")])
    pos += 1
    n_feat = section("features")
    names, cols = [], []
    for line in lines[pos:pos + n_feat]:
        name, *vals = line.split("\t")
        names.append(name)
        cols.append([float(v) for v in vals])
    weights = np.array(cols, dtype=np.float64).T.reshape(n_cls, n_feat)
    return LinearModel(classes, {n: j for j, n in enumerate(names)}, np.ascontiguousarray(weights), bias)
