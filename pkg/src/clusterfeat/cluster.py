"""k-means over word vectors: k-means++ seeding, Lloyd iterations, restarts.

Every restart ``i`` draws from its own generator seeded with ``seed + i``, so
results do not depend on whether restarts run sequentially or in threads.
Determinism is defined with respect to the stored vocabulary order: the same
vectors in a different row order are a different input.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .embedio import EmbeddingTable

log = logging.getLogger(__name__)

# k grid swept by the CLI when no k is given
DEFAULT_K_GRID = (100, 250, 500, 1000, 2000)

_CHUNK_ELEMENTS = 1 << 22


class LexiconFormatError(ValueError):
    """Malformed cluster lexicon TSV."""


@dataclass(frozen=True)
class ClusterConfig:
    k: int
    max_iterations: int = 300
    restarts: int = 10
    seed: int = 0
    tolerance: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be non-negative")

    def validate(self, n_points: int) -> None:
        if self.k > n_points:
            raise ValueError(f"k={self.k} exceeds the number of points ({n_points})")


@dataclass
class LloydResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    iterations: int
    history: list[float] = field(default_factory=list)


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng((seed + restart) % (1 << 64))


def nearest_centroids(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of and squared distance to the nearest centroid for every point.

    Ties go to the lowest centroid index.
    """
    n, k = len(points), len(centroids)
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n, dtype=np.float64)
    step = max(1, _CHUNK_ELEMENTS // max(1, k * points.shape[1]))
    for lo in range(0, n, step):
        diff = points[lo:lo + step, None, :] - centroids[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        idx = np.argmin(d2, axis=1)
        labels[lo:lo + step] = idx
        dists[lo:lo + step] = d2[np.arange(len(idx)), idx]
    return labels, dists


def compute_inertia(points: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    diff = points - centroids[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def kmeanspp_init(points, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding.

    The first centroid is a uniformly drawn point; each further centroid is
    drawn among the points not yet chosen with probability proportional to
    the squared distance to the closest centroid chosen so far.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must satisfy 1 <= k <= number of points ({n})")
    if np.isnan(points).any():
        raise ValueError("points contain NaN")

    chosen = [int(rng.integers(n))]
    closest = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        weights = closest.copy()
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=weights / total))
        else:
            # only duplicates of chosen points remain
            remaining = np.setdiff1d(np.arange(n), chosen)
            nxt = int(remaining[rng.integers(len(remaining))])
        chosen.append(nxt)
        closest = np.minimum(closest, np.sum((points - points[nxt]) ** 2, axis=1))
    return points[chosen].copy()


def _reseed_empty(points, centroids, labels, dists, k) -> None:
    """Move each empty cluster onto the point farthest from its centroid."""
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        # never take the last member of another cluster
        donors = counts[labels] > 1
        order = np.argsort(-dists, kind="stable")
        p = next(int(i) for i in order if donors[i])
        counts[labels[p]] -= 1
        counts[j] += 1
        labels[p] = j
        dists[p] = 0.0
        centroids[j] = points[p]


def lloyd_fit(points, init, max_iterations: int = 300, tolerance: float = 0.0) -> LloydResult:
    """Lloyd iterations from the given initial centroids.

    Each iteration assigns points to their nearest centroid and then moves
    centroids to the mean of their points. Stops when the assignment no
    longer changes, when no centroid moves by more than ``tolerance``, or
    after ``max_iterations`` iterations. ``history`` holds the inertia of
    every assignment step and is non-increasing.
    """
    points = np.asarray(points, dtype=np.float64)
    centroids = np.array(init, dtype=np.float64, copy=True)
    k = len(centroids)
    if k > len(points):
        raise ValueError("more centroids than points")

    labels = None
    history: list[float] = []
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        new_labels, dists = nearest_centroids(points, centroids)
        _reseed_empty(points, centroids, new_labels, dists, k)
        history.append(float(dists.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, points)
        counts = np.bincount(labels, minlength=k).astype(np.float64)
        updated = sums / counts[:, None]
        shift = float(np.sqrt(np.max(np.sum((updated - centroids) ** 2, axis=1))))
        centroids = updated
        if shift <= tolerance:
            break

    inertia = compute_inertia(points, centroids, labels)
    if inertia < history[-1]:
        history.append(inertia)
    return LloydResult(centroids, labels, inertia, iterations, history)


@dataclass(frozen=True)
class RestartStats:
    restart: int
    seed: int
    inertia: float
    iterations: int


@dataclass(frozen=True, eq=False)
class ClusterModel:
    centroids: np.ndarray
    vocab: tuple[str, ...]
    labels: np.ndarray
    inertia: float
    config: ClusterConfig
    restarts: tuple[RestartStats, ...] = ()
    best_restart: int = 0
    normalized: bool = False

    @property
    def k(self) -> int:
        return len(self.centroids)

    @property
    def assignment(self) -> dict[str, int]:
        return dict(zip(self.vocab, (int(x) for x in self.labels)))

    def cluster_of(self, word: str) -> int | None:
        index = self.__dict__.get("_index")
        if index is None:
            index = {w: int(c) for w, c in zip(self.vocab, self.labels)}
            object.__setattr__(self, "_index", index)
        return index.get(word)


def fit_with_restarts(table: EmbeddingTable, config: ClusterConfig, n_jobs: int = 1,
                      normalize: bool = False) -> ClusterModel:
    """Run ``config.restarts`` seeded k-means++/Lloyd fits, keep the lowest inertia.

    Ties in inertia go to the lowest restart index. ``normalize`` clusters
    unit-length copies of the vectors instead of the raw ones.
    """
    config.validate(len(table))
    points = table.vectors
    if normalize:
        norms = np.linalg.norm(points, axis=1, keepdims=True)
        points = points / np.where(norms == 0, 1.0, norms)

    def one(i: int) -> LloydResult:
        init = kmeanspp_init(points, config.k, restart_rng(config.seed, i))
        return lloyd_fit(points, init, config.max_iterations, config.tolerance)

    if n_jobs > 1 and config.restarts > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(one, range(config.restarts)))
    else:
        results = [one(i) for i in range(config.restarts)]

    best = min(range(len(results)), key=lambda i: (results[i].inertia, i))
    stats = tuple(
        RestartStats(i, (config.seed + i) % (1 << 64), r.inertia, r.iterations)
        for i, r in enumerate(results)
    )
    for s in stats:
        log.info("restart %d: inertia=%.6g iterations=%d", s.restart, s.inertia, s.iterations)
    r = results[best]
    return ClusterModel(r.centroids, table.vocab, r.labels, r.inertia, config, stats, best,
                        normalize)


def assign_word(model, word: str) -> int | None:
    return model.cluster_of(word)


@dataclass(frozen=True)
class ClusterLexicon:
    """Word to cluster-id map read back from a lexicon file."""

    k: int
    mapping: dict[str, int]
    meta: dict[str, str] = field(default_factory=dict)

    def cluster_of(self, word: str) -> int | None:
        return self.mapping.get(word)


def export_lexicon(model: ClusterModel, path) -> None:
    """Write ``word<TAB>cluster_id`` lines sorted by cluster id, then word.

    Two comment lines record k, seed, restarts and the inertia.
    """
    rows = sorted(((int(c), w) for w, c in zip(model.vocab, model.labels)))
    cfg = model.config
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# k={model.k}\tseed={cfg.seed}\trestarts={cfg.restarts}"
                 f"\tmax_iterations={cfg.max_iterations}\n")
        fh.write(f"# inertia={model.inertia!r}\n")
        for cid, word in rows:
            if "\t" in word or "\n" in word:
                raise ValueError(f"word {word!r} cannot be written to a TSV lexicon")
            fh.write(f"{word}\t{cid}\n")


def load_lexicon(path) -> ClusterLexicon:
    meta: dict[str, str] = {}
    mapping: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if line.startswith("#"):
                for item in line[1:].strip().split("\t"):
                    key, sep, value = item.partition("=")
                    if sep:
                        meta[key.strip()] = value.strip()
                continue
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconFormatError(f"{path}:{lineno}: expected word<TAB>cluster_id")
            word, cid = parts
            try:
                cid = int(cid)
            except ValueError:
                raise LexiconFormatError(f"{path}:{lineno}: cluster id {cid!r} is not an integer") from None
            if cid < 0 or ("k" in meta and cid >= int(meta["k"])):
                raise LexiconFormatError(f"{path}:{lineno}: cluster id {cid} out of range")
            if word in mapping:
                raise LexiconFormatError(f"{path}:{lineno}: duplicate word {word!r}")
            mapping[word] = cid
    if not mapping:
        raise LexiconFormatError(f"{path}: empty lexicon")
    k = int(meta["k"]) if "k" in meta else max(mapping.values()) + 1
    return ClusterLexicon(k, mapping, meta)


def import_lexicon(path) -> dict[str, int]:
    return load_lexicon(path).mapping
