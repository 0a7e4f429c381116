from __future__ import annotations

import numpy as np
import pytest

from maris.topics import (CoClusteringModel, DocTermMatrix, assign_topics,
                          build_doc_term_matrix, factorize, top_words)
from oracles import adjusted_rand_index

BLOCK_X = np.array([[1.0, 1.0, 0.0, 0.0],
                    [1.0, 1.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0, 1.0],
                    [0.0, 0.0, 1.0, 1.0]])


class TestDocTermMatrix:
    def test_rejects_negative_entries(self):
        with pytest.raises(ValueError):
            DocTermMatrix(X=np.array([[1.0, -0.1]]), row_ids=("a",),
                          col_terms=("t1", "t2"))

    def test_rejects_all_zero_rows(self):
        with pytest.raises(ValueError):
            DocTermMatrix(X=np.array([[1.0, 0.0], [0.0, 0.0]]),
                          row_ids=("a", "b"), col_terms=("t1", "t2"))

    def test_build_drops_empty_documents(self):
        matrix = build_doc_term_matrix({"a": "oil rig", "b": "  ",
                                        "c": "coral reef"})
        assert matrix.row_ids == ("a", "c")
        assert (matrix.X >= 0).all()

    def test_tfidf_weights_from_tokenizer(self):
        matrix = build_doc_term_matrix({"a": "oil oil reef",
                                        "b": "reef coral"})
        col = matrix.col_terms.index("oil")
        row = matrix.row_ids.index("a")
        # tf=2 for "oil" in doc a, so its weight is twice the 1-count idf.
        single = matrix.X[row, matrix.col_terms.index("coral")]
        assert single == 0.0
        assert matrix.X[row, col] > 0


class TestFactorize:
    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            factorize(BLOCK_X, k=5, l=2)
        with pytest.raises(ValueError):
            factorize(BLOCK_X, k=2, l=9)
        with pytest.raises(ValueError):
            factorize(np.array([[1.0, np.nan]]), k=1, l=1)

    def test_single_cluster_forced(self):
        model = factorize(BLOCK_X, k=1, l=1, max_iter=50, seed=0)
        assignments = assign_topics(model)
        assert set(assignments.values()) == {0}

    def test_block_diagonal_recovery_across_seeds(self):
        recovered = 0
        for seed in range(5):
            model = factorize(BLOCK_X, k=2, l=2, max_iter=200, seed=seed,
                              converge_tol=0.0)
            labels = [assign_topics(model)[f"row{i}"] for i in range(4)]
            if adjusted_rand_index(labels, [0, 0, 1, 1]) == 1.0:
                recovered += 1
        assert recovered >= 4

    def test_objective_trace_non_increasing_random_matrix(self):
        rng = np.random.default_rng(17)
        X = rng.random((50, 80))
        model = factorize(X, k=5, l=6, max_iter=200, seed=1,
                          converge_tol=0.0)
        trace = model.objective_trace
        assert len(trace) == 200
        for prev, curr in zip(trace, trace[1:]):
            assert curr <= prev + 1e-9

    def test_nonnegativity_preserved(self):
        rng = np.random.default_rng(5)
        model = factorize(rng.random((20, 30)), k=3, l=4, max_iter=100,
                          seed=2)
        assert (model.F >= 0).all()
        assert (model.S >= 0).all()
        assert (model.G >= 0).all()

    def test_reproducibility_bit_identical(self):
        rng = np.random.default_rng(23)
        X = rng.random((10, 12))
        a = factorize(X, k=2, l=3, max_iter=80, seed=4)
        b = factorize(X, k=2, l=3, max_iter=80, seed=4)
        assert (a.F == b.F).all() and (a.G == b.G).all()
        assert assign_topics(a) == assign_topics(b)

    def test_scaling_invariance_of_assignments(self):
        rng = np.random.default_rng(31)
        X = rng.random((12, 15))
        base = assign_topics(factorize(X, k=3, l=4, max_iter=150, seed=5,
                                       converge_tol=0.0))
        for c in (0.01, 3.0, 250.0):
            scaled = assign_topics(factorize(c * X, k=3, l=4, max_iter=150,
                                             seed=5, converge_tol=0.0))
            assert scaled == base

    def test_convergence_stop(self):
        model = factorize(BLOCK_X, k=2, l=2, max_iter=5000, seed=0,
                          converge_tol=1e-6)
        assert len(model.objective_trace) < 5000

    def test_restarts_pick_best_objective(self):
        rng = np.random.default_rng(2)
        X = rng.random((15, 18))
        single = factorize(X, k=3, l=3, max_iter=60, seed=0)
        multi = factorize(X, k=3, l=3, max_iter=60, seed=0, restarts=5)
        assert multi.objective_trace[-1] <= single.objective_trace[-1]

    def test_orthogonal_flag_is_a_stub(self):
        with pytest.raises(NotImplementedError):
            factorize(BLOCK_X, k=2, l=2, orthogonal=True)


class TestAssignments:
    def model_with_F(self, F):
        m, k = F.shape
        return CoClusteringModel(
            F=F, S=np.ones((k, 2)), G=np.ones((3, 2)),
            objective_trace=(1.0,),
            row_ids=tuple(f"row{i}" for i in range(m)),
            col_terms=("t0", "t1", "t2"), seed=0)

    def test_argmax_assignment(self):
        model = self.model_with_F(np.array([[0.9, 0.1], [0.2, 0.7]]))
        assert assign_topics(model) == {"row0": 0, "row1": 1}

    def test_tie_goes_to_lowest_index(self):
        model = self.model_with_F(np.array([[0.5, 0.5]]))
        assert assign_topics(model) == {"row0": 0}

    def test_planted_fixture_matches_partition(self):
        model = factorize(BLOCK_X, k=2, l=2, max_iter=200, seed=1,
                          converge_tol=0.0)
        labels = [assign_topics(model)[f"row{i}"] for i in range(4)]
        assert labels[0] == labels[1]
        assert labels[2] == labels[3]
        assert labels[0] != labels[2]


class TestTopWords:
    def make_model(self, G, terms):
        n, l = G.shape
        return CoClusteringModel(
            F=np.ones((2, 2)), S=np.ones((2, l)), G=G,
            objective_trace=(1.0,), row_ids=("a", "b"),
            col_terms=terms, seed=0)

    def test_dominant_term_first(self):
        model = self.make_model(np.array([[0.1], [5.0], [0.2]]),
                                ("alga", "coral", "tide"))
        assert top_words(model, 0, 2) == ["coral", "tide"]

    def test_zero_terms(self):
        model = self.make_model(np.array([[1.0], [2.0]]), ("a", "b"))
        assert top_words(model, 0, 0) == []

    def test_truncated_to_vocabulary(self):
        model = self.make_model(np.array([[1.0], [2.0]]), ("a", "b"))
        assert top_words(model, 0, 99) == ["b", "a"]

    def test_ties_lexicographic(self):
        model = self.make_model(np.array([[1.0], [1.0], [2.0]]),
                                ("zeta", "alfa", "mar"))
        assert top_words(model, 0, 3) == ["mar", "alfa", "zeta"]

    def test_planted_block_vocabulary(self):
        # Terms 0-1 belong to the first planted topic, 2-3 to the second.
        model = factorize(
            DocTermMatrix(X=BLOCK_X, row_ids=("r0", "r1", "r2", "r3"),
                          col_terms=("tide", "wave", "oil", "gas")),
            k=2, l=2, max_iter=300, seed=0, converge_tol=0.0)
        topics = [set(top_words(model, t, 2)) for t in range(2)]
        assert {frozenset(t) for t in topics} == {
            frozenset({"tide", "wave"}), frozenset({"oil", "gas"})}
