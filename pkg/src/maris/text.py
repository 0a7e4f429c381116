"""Shared text utilities: Unicode tokenization and sentence splitting.

Every module that counts, matches, or compares tokens goes through
`tokenize` so that token boundaries are identical platform-wide.
"""

from __future__ import annotations

import re

# Runs of Unicode letters/digits; underscore excluded on purpose so that
# snake_case identifiers split into their parts.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# End-of-sentence punctuation followed by whitespace or end of text.
# Abbreviations ("Dr.", "approx.") are split too; known limitation.
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens of `text`.

    Splits on every non-letter/non-digit boundary, case-folds (full
    Unicode folding, diacritics preserved), and never yields an empty
    token. Deterministic; empty input gives an empty list.
    """
    return _TOKEN_RE.findall(text.casefold())


def split_sentences(text: str) -> list[str]:
    """Split `text` into sentences on '.', '!' or '?' + whitespace/end.

    Returned sentences are stripped of surrounding whitespace; empty
    segments are dropped.
    """
    parts = _SENTENCE_RE.split(text)
    return [p.strip() for p in parts if p.strip()]


def normalize_ws(text: str) -> str:
    """Collapse internal whitespace runs to single spaces and strip."""
    return " ".join(text.split())
