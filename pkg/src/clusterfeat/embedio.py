"""Loading of text-format word vector files (GloVe / word2vec text)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


class VectorFileError(ValueError):
    """Malformed word vector file."""


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vocab: tuple[str, ...]
    vectors: np.ndarray
    word_index: dict[str, int] = field(repr=False)
    duplicates: int = 0

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.vectors.shape != (len(self.vocab), self.dim):
            raise ValueError(
                f"vectors shape {self.vectors.shape} != ({len(self.vocab)}, {self.dim})"
            )
        if len(self.word_index) != len(self.vocab):
            raise ValueError("vocabulary words must be unique")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("vectors contain NaN or infinite values")
        self.vectors.setflags(write=False)

    @classmethod
    def from_rows(cls, rows, duplicates: int = 0) -> "EmbeddingTable":
        """Build a table from ``(word, vector)`` pairs, first occurrence wins."""
        vocab: list[str] = []
        data: list[np.ndarray] = []
        index: dict[str, int] = {}
        for word, vec in rows:
            if word in index:
                duplicates += 1
                continue
            index[word] = len(vocab)
            vocab.append(word)
            data.append(np.asarray(vec, dtype=np.float64))
        if not vocab:
            raise ValueError("no vectors")
        matrix = np.vstack(data)
        return cls(matrix.shape[1], tuple(vocab), matrix, index, duplicates)

    def __len__(self):
        return len(self.vocab)

    def __contains__(self, word):
        return word in self.word_index

    def lookup(self, word: str) -> np.ndarray | None:
        row = self.word_index.get(word)
        return None if row is None else self.vectors[row]


def lookup(table: EmbeddingTable, word: str) -> np.ndarray | None:
    return table.lookup(word)


def _is_header(parts: list[str]) -> bool:
    if len(parts) != 2:
        return False
    try:
        return int(parts[0]) >= 0 and int(parts[1]) > 0
    except ValueError:
        return False


def load_vectors(path, expected_dim: int | None = None) -> EmbeddingTable:
    """Parse a ``word v1 ... vD`` text file into an :class:`EmbeddingTable`.

    An optional ``N D`` header line is skipped. The dimension comes from
    ``expected_dim`` or else from the first data line; every other line must
    agree. Duplicate words keep their first vector and are counted in
    ``table.duplicates``.

    Raises:
        VectorFileError: on an empty file, a dimension mismatch or a
            non-numeric / non-finite component. The message names the line.
    """
    dim = expected_dim
    vocab: list[str] = []
    index: dict[str, int] = {}
    rows: list[np.ndarray] = []
    duplicates = 0
    seen_data = False

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.rstrip(" ").split(" ")
            if not seen_data and lineno == 1 and _is_header(parts):
                header_dim = int(parts[1])
                if dim is not None and header_dim != dim:
                    raise VectorFileError(
                        f"{path}:{lineno}: header declares D={header_dim}, expected {dim}"
                    )
                dim = header_dim
                continue
            seen_data = True
            word, comps = parts[0], parts[1:]
            if dim is None:
                dim = len(comps)
                if dim == 0:
                    raise VectorFileError(f"{path}:{lineno}: line has no vector components")
            if len(comps) != dim:
                raise VectorFileError(
                    f"{path}:{lineno}: expected {dim} components, found {len(comps)}"
                )
            try:
                vec = np.array([float(c) for c in comps], dtype=np.float64)
            except ValueError as exc:
                raise VectorFileError(f"{path}:{lineno}: non-numeric component ({exc})") from None
            if not np.all(np.isfinite(vec)):
                raise VectorFileError(f"{path}:{lineno}: non-finite component")
            if word in index:
                duplicates += 1
                continue
            index[word] = len(vocab)
            vocab.append(word)
            rows.append(vec)

    if not vocab:
        raise VectorFileError(f"{path}: no vectors found")
    if duplicates:
        log.warning("%s: %d duplicate words ignored (first occurrence kept)", path, duplicates)
    return EmbeddingTable(dim, tuple(vocab), np.vstack(rows), index, duplicates)


def save_vectors(table: EmbeddingTable, path, header: bool = False) -> None:
    """Write ``table`` in the text format read by :func:`load_vectors`.

    Components are written with ``repr`` so a reload is bit-exact.
    """
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(table)} {table.dim}\n")
        for word, vec in zip(table.vocab, table.vectors):
            fh.write(word + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def normalize_rows(table: EmbeddingTable) -> EmbeddingTable:
    """Return a copy with every vector scaled to unit length (zero rows kept)."""
    norms = np.linalg.norm(table.vectors, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return EmbeddingTable(
        table.dim, table.vocab, table.vectors / norms, dict(table.word_index), table.duplicates
    )


def restrict(table: EmbeddingTable, words) -> EmbeddingTable:
    """Sub-table over ``words`` that are in the vocabulary, in table order."""
    wanted = set(words)
    keep = [i for i, w in enumerate(table.vocab) if w in wanted]
    if not keep:
        raise ValueError("none of the requested words are in the vocabulary")
    vocab = tuple(table.vocab[i] for i in keep)
    return EmbeddingTable(
        table.dim, vocab, table.vectors[keep].copy(), {w: i for i, w in enumerate(vocab)}
    )


__all__ = [
    "EmbeddingTable",
    "VectorFileError",
    "load_vectors",
    "lookup",
    "normalize_rows",
    "restrict",
    "save_vectors",
]
