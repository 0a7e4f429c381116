"""Query-focused extractive multi-document summarization.

Sentences from the requested documents are ranked by TF-IDF cosine to
the title (the query), the best L are kept in rank order, and the
concatenation is capped at n tokens, preferring a sentence boundary.
The abstractive rewrite stage is out of scope; the boundary (title +
L sentences in, summary out) is kept so one can be added later.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .datalake import Document
from .retriever import InvertedIndex, tfidf_cosine
from .text import split_sentences, tokenize


@dataclass(frozen=True)
class SummaryRequest:
    """Title (query), documents to summarize, sentence budget L, token cap n."""

    title: str
    doc_ids: tuple[str, ...]
    L: int = 3
    n: int = 120

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class RankedSentence:
    sentence: str
    score: float
    doc_id: str
    sentence_index: int


@dataclass(frozen=True)
class Summary:
    text: str
    provenance: tuple[RankedSentence, ...]
    duplicate_sentences: tuple[str, ...] = ()


def rank_sentences(title: str, documents: Sequence[Document],
                   index: InvertedIndex) -> list[RankedSentence]:
    """All sentences scored against the title, best first.

    Ties (including the all-zero case) preserve (doc id, sentence
    index) order, so inputs already ordered by id keep their original
    reading order.
    """
    if not documents:
        raise ValueError("rank_sentences needs at least one document")
    ranked: list[RankedSentence] = []
    for doc in sorted(documents, key=lambda d: d.id):
        for idx, sentence in enumerate(split_sentences(doc.body)):
            ranked.append(RankedSentence(
                sentence=sentence,
                score=tfidf_cosine(index, title, sentence),
                doc_id=doc.id, sentence_index=idx))
    ranked.sort(key=lambda r: (-r.score, r.doc_id, r.sentence_index))
    return ranked


def summarize(request: SummaryRequest, lake,
              index: InvertedIndex) -> Summary:
    """Top-L sentences for the request, concatenated and token-capped.

    The selection (provenance) is always the full top-L; the realized
    text is the concatenation truncated to n tokens on a sentence
    boundary when at least one sentence fits, otherwise a hard token
    cut of the best sentence. Duplicate sentences appearing in several
    documents are kept and flagged in `duplicate_sentences`.
    """
    documents = [lake.get_document(doc_id) for doc_id in request.doc_ids]
    if not documents:
        return Summary(text="", provenance=())
    ranked = rank_sentences(request.title, documents, index)
    top = ranked[:request.L]

    pieces: list[str] = []
    total = 0
    for pos, entry in enumerate(top):
        n_tokens = len(tokenize(entry.sentence))
        if total + n_tokens <= request.n:
            pieces.append(entry.sentence)
            total += n_tokens
            continue
        if pos == 0:
            # Not even one sentence fits whole: hard token cut.
            pieces.append(_cut_tokens(entry.sentence, request.n))
        break

    seen: set[str] = set()
    duplicates: list[str] = []
    for entry in top:
        if entry.sentence in seen and entry.sentence not in duplicates:
            duplicates.append(entry.sentence)
        seen.add(entry.sentence)
    return Summary(text=" ".join(pieces), provenance=tuple(top),
                   duplicate_sentences=tuple(duplicates))


def _cut_tokens(sentence: str, n: int) -> str:
    """First n tokens of `sentence`, preserving original surface forms."""
    kept: list[str] = []
    for match in re.finditer(r"[^\W_]+", sentence, re.UNICODE):
        kept.append(match.group(0))
        if len(kept) == n:
            break
    return " ".join(kept)
