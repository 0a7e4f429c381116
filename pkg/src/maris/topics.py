"""Topic co-clustering via non-negative matrix tri-factorization.

The doc-term matrix X (m docs x n terms, TF-IDF weighted) is factored
as X ~ F S G^T with F (m x k), S (k x l), G (n x l) all nonnegative,
minimizing the squared Frobenius error with multiplicative updates:

    F <- F * (X G S^T)   / (F S G^T G S^T + eps)
    S <- S * (F^T X G)   / (F^T F S G^T G + eps)
    G <- G * (X^T F S)   / (G S^T F^T F S + eps)

Each update is the standard majorize-minimize rule for its factor with
the others fixed, so the objective is non-increasing sweep to sweep.
Row clusters of F are document topics; columns of G describe each topic
by its highest-weighted terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

EPS = 1e-12


@dataclass(frozen=True)
class DocTermMatrix:
    """Nonnegative doc-term weights with row/column labels.

    Rows are documents, columns vocabulary terms; empty documents must
    be excluded before construction (no all-zero rows).
    """

    X: np.ndarray
    row_ids: tuple[str, ...]
    col_terms: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if self.X.shape != (len(self.row_ids), len(self.col_terms)):
            raise ValueError("X shape does not match row/column labels")
        if not np.isfinite(self.X).all():
            raise ValueError("X contains non-finite entries")
        if (self.X < 0).any():
            raise ValueError("X contains negative entries")
        if (self.X.sum(axis=1) == 0).any():
            raise ValueError("X contains all-zero rows; drop empty documents")


@dataclass(frozen=True)
class CoClusteringModel:
    F: np.ndarray
    S: np.ndarray
    G: np.ndarray
    objective_trace: tuple[float, ...]
    row_ids: tuple[str, ...]
    col_terms: tuple[str, ...]
    seed: int


def build_doc_term_matrix(texts: Mapping[str, str]) -> DocTermMatrix:
    """TF-IDF doc-term matrix over `texts`, empty documents dropped."""
    from .retriever import build_index

    filtered = {doc_id: text for doc_id, text in texts.items()
                if text.strip()}
    if not filtered:
        raise ValueError("no non-empty documents to factorize")
    index = build_index(filtered)
    terms = sorted(index.postings)
    col = {t: j for j, t in enumerate(terms)}
    row_ids = tuple(sorted(filtered))
    X = np.zeros((len(row_ids), len(terms)))
    row = {doc_id: i for i, doc_id in enumerate(row_ids)}
    for term, plist in index.postings.items():
        idf = index.idf(term)
        for doc_id, tf in plist:
            X[row[doc_id], col[term]] = tf * idf
    keep = X.sum(axis=1) > 0
    return DocTermMatrix(X=X[keep], row_ids=tuple(np.array(row_ids)[keep]),
                         col_terms=tuple(terms))


def _objective(X: np.ndarray, F: np.ndarray, S: np.ndarray,
               G: np.ndarray) -> float:
    residual = X - F @ S @ G.T
    return float(np.sum(residual * residual))


def factorize(matrix: DocTermMatrix | np.ndarray, k: int, l: int,
              max_iter: int = 200, seed: int = 0,
              converge_tol: float = 1e-6, restarts: int = 1,
              orthogonal: bool = False) -> CoClusteringModel:
    """Tri-factorize the doc-term matrix into k row and l column clusters.

    Deterministic given the seed: factors start uniform random from
    numpy's seeded generator. Iteration stops at `max_iter` sweeps or
    when the relative objective change drops below `converge_tol`
    (pass 0 to always run `max_iter`). With restarts > 1, consecutive
    seeds are tried and the best final objective wins.
    """
    if orthogonal:
        raise NotImplementedError(
            "orthogonality penalty is a configuration stub; "
            "plain tri-factorization is the supported path")
    if isinstance(matrix, DocTermMatrix):
        X = matrix.X
        row_ids, col_terms = matrix.row_ids, matrix.col_terms
    else:
        X = np.asarray(matrix, dtype=float)
        if not np.isfinite(X).all():
            raise ValueError("X contains non-finite entries")
        if (X < 0).any():
            raise ValueError("X contains negative entries")
        row_ids = tuple(f"row{i}" for i in range(X.shape[0]))
        col_terms = tuple(f"col{j}" for j in range(X.shape[1]))
    m, n = X.shape
    if not 1 <= k <= m:
        raise ValueError(f"k must be in 1..{m}, got {k}")
    if not 1 <= l <= n:
        raise ValueError(f"l must be in 1..{n}, got {l}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")

    best: CoClusteringModel | None = None
    for attempt in range(restarts):
        model = _factorize_once(X, k, l, max_iter, seed + attempt,
                                converge_tol, row_ids, col_terms)
        if best is None or (model.objective_trace[-1]
                            < best.objective_trace[-1]):
            best = model
    assert best is not None
    return best


def _factorize_once(X: np.ndarray, k: int, l: int, max_iter: int, seed: int,
                    converge_tol: float, row_ids: tuple[str, ...],
                    col_terms: tuple[str, ...]) -> CoClusteringModel:
    rng = np.random.default_rng(seed)
    m, n = X.shape
    F = rng.random((m, k))
    S = rng.random((k, l))
    G = rng.random((n, l))

    trace: list[float] = []
    for _ in range(max_iter):
        F *= (X @ G @ S.T) / (F @ S @ (G.T @ G) @ S.T + EPS)
        S *= (F.T @ X @ G) / ((F.T @ F) @ S @ (G.T @ G) + EPS)
        G *= (X.T @ F @ S) / (G @ S.T @ (F.T @ F) @ S + EPS)
        obj = _objective(X, F, S, G)
        trace.append(obj)
        if len(trace) >= 2:
            prev = trace[-2]
            if prev == 0.0 or abs(prev - obj) / prev < converge_tol:
                break
    return CoClusteringModel(F=F, S=S, G=G, objective_trace=tuple(trace),
                             row_ids=row_ids, col_terms=col_terms, seed=seed)


def assign_topics(model: CoClusteringModel) -> dict[str, int]:
    """Document id -> topic index by row-wise argmax of F (ties: lowest)."""
    assignment = np.argmax(model.F, axis=1)
    return {doc_id: int(topic)
            for doc_id, topic in zip(model.row_ids, assignment)}


def top_words(model: CoClusteringModel, topic: int, t: int) -> list[str]:
    """The t terms with the largest G weight for `topic`, descending.

    Ties break lexicographically; t larger than the vocabulary is
    truncated, t = 0 gives an empty list.
    """
    n_topics = model.G.shape[1]
    if not 0 <= topic < n_topics:
        raise ValueError(f"topic must be in 0..{n_topics - 1}, got {topic}")
    t = max(0, min(t, len(model.col_terms)))
    if t == 0:
        return []
    weights = model.G[:, topic]
    order = sorted(range(len(model.col_terms)),
                   key=lambda j: (-weights[j], model.col_terms[j]))
    return [model.col_terms[j] for j in order[:t]]
