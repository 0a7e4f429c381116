"""Pluggable entity/word vectors shared by the graph and paraphrase modules.

Vectors come either from a whitespace-separated file (entity TAB
components) or from the built-in provider, which counts co-occurrences
over a sliding window in the corpus itself. Contextual transformer
embeddings can be dropped in through the same file format.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .text import tokenize


class EmbeddingStore:
    """Entity -> fixed-dimension vector map with uniform dimensionality.

    Zero-norm vectors are rejected at insert time, so `get` returning a
    vector guarantees it is usable for cosine comparisons.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"embedding dimension must be >= 1, got {dim}")
        self.dim = dim
        self._vectors: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, entity: str) -> bool:
        return entity in self._vectors

    def entities(self) -> list[str]:
        return sorted(self._vectors)

    def add(self, entity: str, vector: Iterable[float]) -> None:
        vec = np.asarray(list(vector), dtype=float)
        if vec.shape != (self.dim,):
            raise ValueError(
                f"vector for {entity!r} has dimension {vec.shape[0] if vec.ndim == 1 else vec.shape}, "
                f"store expects {self.dim}")
        if not np.isfinite(vec).all():
            raise ValueError(f"vector for {entity!r} has non-finite entries")
        if float(np.dot(vec, vec)) == 0.0:
            raise ValueError(f"vector for {entity!r} has zero norm")
        self._vectors[entity] = vec

    def get(self, entity: str) -> np.ndarray | None:
        return self._vectors.get(entity)

    def save(self, path: str | Path) -> None:
        lines = []
        for entity in sorted(self._vectors):
            values = " ".join(repr(float(x)) for x in self._vectors[entity])
            lines.append(f"{entity}\t{values}\n")
        Path(path).write_text("".join(lines), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingStore":
        store: EmbeddingStore | None = None
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entity, _, rest = line.partition("\t")
            values = [float(x) for x in rest.split()]
            if store is None:
                store = cls(dim=len(values))
            store.add(entity, values)
        if store is None:
            raise ValueError(f"{path}: empty embedding file")
        return store


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Plain cosine similarity; raises on zero vectors or dim mismatch."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = math.sqrt(float(np.dot(u, u)))
    nv = math.sqrt(float(np.dot(v, v)))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero vectors")
    return float(np.dot(u, v)) / (nu * nv)


def cooccurrence_embeddings(texts: Mapping[str, str],
                            entities: Iterable[str],
                            dim: int = 64, window: int = 4,
                            ) -> EmbeddingStore:
    """Count-based context vectors computed from the corpus itself.

    The vector space has one axis per context word, using the `dim`
    most frequent corpus tokens (ties alphabetical). An entity's vector
    counts the context tokens within `window` positions of each
    occurrence of the entity's token sequence across all texts.
    Entities that never occur (or only next to out-of-vocabulary
    context) end up with zero counts and are left out of the store.
    """
    token_docs = {doc_id: tokenize(text) for doc_id, text in texts.items()}
    freq: dict[str, int] = {}
    for tokens in token_docs.values():
        for tok in tokens:
            freq[tok] = freq.get(tok, 0) + 1
    vocab = sorted(freq, key=lambda t: (-freq[t], t))[:dim]
    axis = {tok: i for i, tok in enumerate(vocab)}
    store = EmbeddingStore(dim=dim)

    for entity in sorted(set(entities)):
        phrase = tokenize(entity)
        if not phrase:
            continue
        counts = np.zeros(dim, dtype=float)
        width = len(phrase)
        for tokens in token_docs.values():
            for start in range(0, len(tokens) - width + 1):
                if tokens[start:start + width] != phrase:
                    continue
                lo = max(0, start - window)
                hi = min(len(tokens), start + width + window)
                for pos in range(lo, hi):
                    if start <= pos < start + width:
                        continue
                    ctx = axis.get(tokens[pos])
                    if ctx is not None:
                        counts[ctx] += 1.0
        if counts.any():
            store.add(entity, counts)
    return store


def sentence_vector(text: str, store: EmbeddingStore) -> np.ndarray | None:
    """Mean of the token vectors of `text`; None when no token is known."""
    vectors = [store.get(tok) for tok in tokenize(text)]
    vectors = [v for v in vectors if v is not None]
    if not vectors:
        return None
    return np.mean(vectors, axis=0)
