"""Synthetic corpora whose labels are carried only by word-cluster identity.

Keywords are random lowercase strings, so surface n-grams say nothing about
the label, and test keywords never occur in training. The vectors place every
keyword group in its own tight, well separated blob.
"""

from __future__ import annotations

import string

import numpy as np

from clusterfeat.embedio import EmbeddingTable
from clusterfeat.linmodel import LinearModel
from clusterfeat.sentiment import FIVE_POINT, SentimentItem
from clusterfeat.seqtag import TaggedSequence


def random_words(rng, count, length=7, taken=None):
    taken = set() if taken is None else taken
    words = []
    while len(words) < count:
        w = "".join(rng.choice(list(string.ascii_lowercase), size=length))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


def blob_table(groups: dict[str, list[str]], dim=6, spread=0.05, seed=0) -> EmbeddingTable:
    """One blob per group, centred on ``10 * e_i``."""
    rng = np.random.default_rng(seed)
    rows = []
    for i, (_, words) in enumerate(sorted(groups.items())):
        centre = np.zeros(dim)
        centre[i % dim] = 10.0 * (1 + i // dim)
        for w in words:
            rows.append((w, centre + rng.normal(scale=spread, size=dim)))
    return EmbeddingTable.from_rows(rows)


def write_table(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for w, v in zip(table.vocab, table.vectors):
            fh.write(w + " " + " ".join(repr(float(x)) for x in v) + "\n")


def sentiment_fixture(n_train=1000, n_test=200, seed=0, classes=FIVE_POINT):
    """Documents of filler words plus one keyword whose group gives the label."""
    rng = np.random.default_rng(seed)
    taken: set[str] = set()
    filler = random_words(rng, 40, taken=taken)
    train_kw = {c: random_words(rng, 12, taken=taken) for c in classes}
    test_kw = {c: random_words(rng, 12, taken=taken) for c in classes}
    groups = {"zz_filler": filler}
    groups.update({f"kw{i}": train_kw[c] + test_kw[c] for i, c in enumerate(classes)})
    table = blob_table(groups, seed=seed)

    def make(n, keywords, prefix):
        items = []
        for i in range(n):
            label = classes[i % len(classes)]
            words = list(rng.choice(filler, size=4))
            words.insert(int(rng.integers(len(words) + 1)), str(rng.choice(keywords[label])))
            items.append(SentimentItem(f"{prefix}{i}", f"subj{i % 4}", label, " ".join(words)))
        return items

    return make(n_train, train_kw, "tr"), make(n_test, test_kw, "te"), table


def ner_fixture(n_train=150, n_test=80, seed=0, types=("person", "facility")):
    """Lower-case sentences where entity tokens come from per-type word groups."""
    rng = np.random.default_rng(seed)
    taken: set[str] = set()
    filler = random_words(rng, 60, taken=taken)
    train_ent = {t: random_words(rng, 15, taken=taken) for t in types}
    test_ent = {t: random_words(rng, 15, taken=taken) for t in types}
    groups = {"zz_filler": filler}
    groups.update({f"ent{i}": train_ent[t] + test_ent[t] for i, t in enumerate(types)})
    table = blob_table(groups, seed=seed)

    def make(n, entities):
        out = []
        for _ in range(n):
            tokens, tags = [], []
            for _ in range(int(rng.integers(2, 4))):
                for _ in range(int(rng.integers(1, 3))):
                    tokens.append(str(rng.choice(filler)))
                    tags.append("O")
                etype = str(rng.choice(types))
                for j in range(int(rng.integers(1, 3))):
                    tokens.append(str(rng.choice(entities[etype])))
                    tags.append(("B-" if j == 0 else "I-") + etype)
            tokens.append(str(rng.choice(filler)))
            tags.append("O")
            out.append(TaggedSequence(tokens, tags))
        return out

    return make(n_train, train_ent), make(n_test, test_ent), table


def caps_fixture(n, seed=0):
    """Entities are exactly the all-caps tokens (one token per entity)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        tokens, tags = [], []
        for _ in range(int(rng.integers(3, 9))):
            w = "".join(rng.choice(list(string.ascii_lowercase), size=int(rng.integers(2, 7))))
            if rng.random() < 0.3:
                tokens.append(w.upper())
                tags.append("B-ENT")
            else:
                tokens.append(w)
                tags.append("O")
        out.append(TaggedSequence(tokens, tags))
    return out


def write_conll(sequences, path):
    with open(path, "w", encoding="utf-8") as fh:
        for s in sequences:
            for tok, tag in zip(s.tokens, s.tags):
                fh.write(f"{tok}\t{tag}\n")
            fh.write("\n")


def write_sentiment(items, path):
    with open(path, "w", encoding="utf-8") as fh:
        for it in items:
            fh.write(f"{it.id}\t{it.subject}\t{it.label}\t{it.text}\n")


def random_problem(seed, n=10, d=5, c=3, zero=False):
    """Random sparse dataset and model; returns ``(model, data, X, y)``."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    X[rng.random(size=X.shape) < 0.3] = 0.0
    y = rng.integers(c, size=n)
    y[:c] = np.arange(c)
    names = [f"f:{j}" for j in range(d)]
    data = [({names[j]: X[i, j] for j in range(d) if X[i, j] != 0}, f"c{y[i]}") for i in range(n)]
    classes = tuple(f"c{i}" for i in range(c))
    W = np.zeros((c, d)) if zero else rng.normal(size=(c, d))
    b = np.zeros(c) if zero else rng.normal(size=c)
    model = LinearModel(classes, {n_: j for j, n_ in enumerate(names)}, W, b)
    return model, data, X, y
