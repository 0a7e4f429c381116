"""Lexical retrieval: inverted index, Okapi BM25 ranking, TF-IDF cosine.

The index is an immutable snapshot built once over a document set; all
search entry points are pure functions over it, so concurrent queries
are safe and a rebuild is an atomic reference swap in the caller.

BM25 uses the Okapi formulation with the nonnegative IDF

    idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1)

which is strictly positive for every df in [0, N], so a document that
matches at least one query term always receives a positive score.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .text import tokenize

__all__ = [
    "InvertedIndex",
    "RetrievalQuery",
    "build_index",
    "bm25_search",
    "tfidf_cosine",
    "tfidf_vector",
    "tokenize",
]

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


@dataclass(frozen=True)
class RetrievalQuery:
    """Free-text query plus the retrieval depth k (number of documents)."""

    text: str
    k: int = 5

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"retrieval depth k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class InvertedIndex:
    """Immutable term -> postings snapshot over a document set.

    postings maps each term to a list of (doc_id, term_frequency) pairs
    sorted by doc_id; doc_lens maps doc_id to its token count.
    """

    doc_count: int
    avg_doc_len: float
    postings: dict[str, list[tuple[str, int]]]
    doc_lens: dict[str, int]
    stopwords: frozenset[str] = field(default_factory=frozenset)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log((self.doc_count - df + 0.5) / (df + 0.5) + 1.0)

    def doc_ids(self) -> list[str]:
        return sorted(self.doc_lens)

    def save(self, path: str | Path) -> None:
        payload = {
            "doc_count": self.doc_count,
            "avg_doc_len": self.avg_doc_len,
            "postings": {t: [[d, tf] for d, tf in p]
                         for t, p in self.postings.items()},
            "doc_lens": self.doc_lens,
            "stopwords": sorted(self.stopwords),
        }
        Path(path).write_text(json.dumps(payload, ensure_ascii=False),
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            doc_count=raw["doc_count"],
            avg_doc_len=raw["avg_doc_len"],
            postings={t: [(d, int(tf)) for d, tf in p]
                      for t, p in raw["postings"].items()},
            doc_lens={d: int(n) for d, n in raw["doc_lens"].items()},
            stopwords=frozenset(raw.get("stopwords", ())),
        )


def _index_tokens(text: str, stopwords: frozenset[str]) -> list[str]:
    tokens = tokenize(text)
    if stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    return tokens


def build_index(texts: Mapping[str, str],
                stopwords: Iterable[str] = ()) -> InvertedIndex:
    """Index `texts` (doc id -> body). Raises ValueError on empty input.

    Stopword filtering is off by default; when a list is given it is
    applied to documents here and to queries at search time.
    """
    if not texts:
        raise ValueError("cannot build an index over an empty document set")
    stop = frozenset(stopwords)
    postings: dict[str, dict[str, int]] = {}
    doc_lens: dict[str, int] = {}
    for doc_id in sorted(texts):
        tokens = _index_tokens(texts[doc_id], stop)
        doc_lens[doc_id] = len(tokens)
        for tok in tokens:
            tfs = postings.setdefault(tok, {})
            tfs[doc_id] = tfs.get(doc_id, 0) + 1
    return InvertedIndex(
        doc_count=len(doc_lens),
        avg_doc_len=sum(doc_lens.values()) / len(doc_lens),
        postings={t: sorted(tfs.items()) for t, tfs in postings.items()},
        doc_lens=doc_lens,
        stopwords=stop,
    )


def bm25_search(index: InvertedIndex, query: RetrievalQuery,
                k1: float = DEFAULT_K1, b: float = DEFAULT_B,
                ) -> list[tuple[str, float]]:
    """Top-k documents for the query under Okapi BM25.

    Results are sorted by score descending, ties broken by ascending
    doc id; documents matching no query term are omitted. Repeated
    query terms contribute once per occurrence. A query that tokenizes
    to nothing returns an empty list.
    """
    terms = _index_tokens(query.text, index.stopwords)
    if not terms:
        return []
    scores: dict[str, float] = {}
    for term in terms:
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for doc_id, tf in plist:
            norm = k1 * (1.0 - b + b * index.doc_lens[doc_id]
                         / index.avg_doc_len)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * (
                tf * (k1 + 1.0)) / (tf + norm)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:query.k]


def tfidf_vector(index: InvertedIndex, text: str) -> dict[str, float]:
    """Sparse TF-IDF vector of `text` using the index's IDF statistics.

    Terms outside the index vocabulary get the df=0 IDF, so two texts
    sharing an unindexed term still count as similar.
    """
    weights: dict[str, float] = {}
    for tok in _index_tokens(text, index.stopwords):
        weights[tok] = weights.get(tok, 0.0) + 1.0
    for term in weights:
        weights[term] *= index.idf(term)
    return weights


def tfidf_cosine(index: InvertedIndex, text_a: str, text_b: str) -> float:
    """Cosine similarity of the TF-IDF vectors of two texts, in [0, 1].

    Symmetric by construction; 0.0 when either text is empty or the
    vocabularies are disjoint.
    """
    va = tfidf_vector(index, text_a)
    vb = tfidf_vector(index, text_b)
    if not va or not vb:
        return 0.0
    dot = 0.0
    for term in sorted(va.keys() & vb.keys()):
        dot += va[term] * vb[term]
    if dot == 0.0:
        return 0.0
    na = math.sqrt(sum(w * w for w in va.values()))
    nb = math.sqrt(sum(w * w for w in vb.values()))
    return min(1.0, max(0.0, dot / (na * nb)))
