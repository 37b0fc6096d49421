"""Tweet preprocessing and whitespace tokenization.

Corpus text goes through the same two rules used when the word vectors were
built (URL placeholder, punctuation padding) so that corpus tokens line up
with vocabulary entries.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

URL_PATTERN = re.compile(r"(?:https?://|www\.)\S*")
PUNCTUATION = ".,!?;:()[]\"'#@"

_PUNCT_PATTERN = re.compile("([" + re.escape(PUNCTUATION) + "])")


@dataclass(frozen=True)
class Token:
    surface: str
    position: int

    def __post_init__(self):
        if not self.surface or any(ch.isspace() for ch in self.surface):
            raise ValueError(f"invalid token surface: {self.surface!r}")
        if self.position < 0:
            raise ValueError(f"negative token position: {self.position}")


@dataclass(frozen=True)
class PreprocessRules:
    url_placeholder: str = "<url>"
    pad_punctuation: bool = True
    lowercase: bool = False

    def __post_init__(self):
        if not self.url_placeholder or any(ch.isspace() for ch in self.url_placeholder):
            raise ValueError("url_placeholder must be non-empty and contain no whitespace")


# Capitalization is a tagging feature, so NER keeps case; sentiment folds it.
NER_RULES = PreprocessRules(lowercase=False)
SENTIMENT_RULES = PreprocessRules(lowercase=True)


def preprocess(raw: str, rules: PreprocessRules = PreprocessRules()) -> str:
    """Normalize one document.

    URLs (``http://``, ``https://`` or ``www.`` up to the next whitespace)
    become ``rules.url_placeholder``; punctuation from ``PUNCTUATION`` is
    optionally padded with spaces; whitespace runs collapse to one space.

    >>> preprocess("see http://t.co/xyz now!")
    'see <url> now !'
    """
    text = raw.lower() if rules.lowercase else raw
    text = URL_PATTERN.sub(lambda _: rules.url_placeholder, text)
    if rules.pad_punctuation:
        text = _PUNCT_PATTERN.sub(r" \1 ", text)
    return " ".join(text.split())


def tokenize(prepared: str) -> list[Token]:
    return [Token(surface, i) for i, surface in enumerate(prepared.split())]


def surfaces(tokens: list[Token]) -> list[str]:
    return [t.surface for t in tokens]


def read_corpus(path) -> list[str]:
    """One document per line, UTF-8. Blank lines are kept as empty documents."""
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]
