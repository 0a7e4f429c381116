"""Retrieve-then-read question answering and benchmark harness.

The reader is extractive: over the k retrieved documents it returns the
single sentence with the highest TF-IDF cosine to the question. The
module boundary (question + k documents -> answer) is kept so that a
generative reader can be swapped in behind `extract_answer` later.

Answer triggering gates every answer: a reply is only produced when the
top retrieval score and the reader similarity clear their thresholds;
otherwise the configured refusal message is returned with no sources.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .config import QaConfig
from .datalake import Document, QASet, SourceRef
from .retriever import InvertedIndex, RetrievalQuery, bm25_search, tfidf_cosine
from .text import split_sentences, tokenize

BENCHMARK_TASKS = ("mrc", "ir", "open-qa", "answer-triggering",
                   "multiple-choice")


@dataclass(frozen=True)
class Answer:
    """Final QA output; refusals carry triggered=False and no sources."""

    text: str
    sources: tuple[SourceRef, ...] = ()
    confidence: float = 0.0
    triggered: bool = False


@dataclass(frozen=True)
class ExtractedSentence:
    sentence: str
    doc_id: str
    sentence_index: int
    score: float


@dataclass(frozen=True)
class BenchmarkReport:
    task: str
    metrics: dict[str, float]
    n_examples: int

    def to_dict(self) -> dict[str, object]:
        return {"task": self.task, "metrics": dict(self.metrics),
                "n_examples": self.n_examples}


def extract_answer(question: str, documents: Sequence[Document],
                   index: InvertedIndex) -> ExtractedSentence | None:
    """Best sentence across `documents` by TF-IDF cosine to the question.

    Ties break to the earliest document then the earliest sentence.
    Returns None when every sentence scores zero (feeds triggering).
    """
    if not documents:
        raise ValueError("extract_answer needs at least one document")
    best: ExtractedSentence | None = None
    for doc in documents:
        for sent_idx, sentence in enumerate(split_sentences(doc.body)):
            score = tfidf_cosine(index, question, sentence)
            if best is None or score > best.score:
                best = ExtractedSentence(sentence, doc.id, sent_idx, score)
    if best is None or best.score <= 0.0:
        return None
    return best


def trigger_answerability(retrieval_scores: Sequence[float],
                          reader_score: float | None,
                          cfg: QaConfig | None = None) -> bool:
    """True iff the top retrieval score and reader similarity clear
    their thresholds. Empty retrieval or a missing reader hit is False."""
    cfg = cfg or QaConfig()
    if not retrieval_scores or reader_score is None:
        return False
    return (max(retrieval_scores) >= cfg.retrieval_threshold
            and reader_score >= cfg.reader_threshold)


def answer_question(question: str, index: InvertedIndex, lake,
                    k: int = 5, cfg: QaConfig | None = None,
                    refusal: str = "") -> Answer:
    """Run the retrieve-then-read pipeline for one question.

    `lake` is anything with get_document(id) -> Document (the data
    lake, or a test stub). When triggering fails the answer text is
    `refusal` and the source list stays empty.
    """
    cfg = cfg or QaConfig()
    hits = bm25_search(index, RetrievalQuery(question, k=k))
    docs = [lake.get_document(doc_id) for doc_id, _ in hits]
    extracted = extract_answer(question, docs, index) if docs else None
    scores = [score for _, score in hits]
    triggered = trigger_answerability(
        scores, extracted.score if extracted else None, cfg)
    if not triggered or extracted is None:
        return Answer(text=refusal, sources=(), confidence=0.0,
                      triggered=False)
    source_doc = lake.get_document(extracted.doc_id)
    return Answer(text=extracted.sentence, sources=(source_doc.source,),
                  confidence=min(1.0, extracted.score), triggered=True)


def likert_to_binary(rating: int, threshold: int = 3) -> int:
    """Map a 1..5 meaningfulness rating to answerable (1) or not (0).

    The threshold is inclusive: rating >= threshold means answerable.
    """
    if rating not in (1, 2, 3, 4, 5):
        raise ValueError(f"likert rating must be in 1..5, got {rating!r}")
    return 1 if rating >= threshold else 0


# -- multiple choice ---------------------------------------------------------


def answer_of(qa: QASet, lang: str = "en") -> str:
    primary, other = ((qa.answer_en, qa.answer_pt) if lang == "en"
                      else (qa.answer_pt, qa.answer_en))
    return primary or other


def question_of(qa: QASet, lang: str = "en") -> str:
    primary, other = ((qa.question_en, qa.question_pt) if lang == "en"
                      else (qa.question_pt, qa.question_en))
    return primary or other


def build_mc_set(target: QASet, pool: Sequence[QASet], index: InvertedIndex,
                 lang: str = "en") -> tuple[list[str], int]:
    """Five alternatives for `target`: its answer plus four distractors.

    Distractors are the pool answers most similar (TF-IDF cosine) to
    the target's supporting text; ties break by ascending pool id, and
    answers duplicating the gold answer or an earlier pick are skipped
    so the correct answer appears exactly once. The five alternatives
    are sorted case-insensitively and the gold index returned.
    """
    gold = answer_of(target, lang)
    candidates = [qa for qa in pool if qa.id != target.id]
    if len(candidates) < 4:
        raise ValueError(
            f"distractor pool must hold >= 4 other QA sets, got "
            f"{len(candidates)}")
    scored = sorted(
        candidates,
        key=lambda qa: (-tfidf_cosine(index, answer_of(qa, lang),
                                      target.supporting_text), qa.id))
    distractors: list[str] = []
    for qa in scored:
        text = answer_of(qa, lang)
        if text == gold or text in distractors or not text:
            continue
        distractors.append(text)
        if len(distractors) == 4:
            break
    if len(distractors) < 4:
        raise ValueError("pool does not contain 4 usable distinct answers")
    alternatives = sorted([gold] + distractors, key=str.casefold)
    return alternatives, alternatives.index(gold)


@dataclass(frozen=True)
class McChoice:
    index: int
    score: float
    low_confidence: bool = False


def select_mc_answer(question: str, alternatives: Sequence[str],
                     index: InvertedIndex, lake, k: int = 5) -> McChoice:
    """Pick the alternative most similar to the retrieved context.

    Context is the concatenation of the bodies of the top-k documents
    for the question. An all-zero score board returns the lowest index
    flagged low-confidence.
    """
    if len(alternatives) != 5:
        raise ValueError(
            f"expected exactly 5 alternatives, got {len(alternatives)}")
    hits = bm25_search(index, RetrievalQuery(question, k=k))
    context = " ".join(lake.get_document(doc_id).body for doc_id, _ in hits)
    best_idx, best_score = 0, 0.0
    for idx, alt in enumerate(alternatives):
        score = tfidf_cosine(index, alt, context) if context else 0.0
        if score > best_score:
            best_idx, best_score = idx, score
    return McChoice(index=best_idx, score=best_score,
                    low_confidence=best_score <= 0.0)


# -- metrics -----------------------------------------------------------------


def normalize_answer(text: str) -> list[str]:
    """Lowercased punctuation-free tokens used by all answer metrics."""
    return tokenize(text)


def exact_match(prediction: str, gold: str) -> int:
    return int(normalize_answer(prediction) == normalize_answer(gold))


def token_f1(prediction: str, gold: str) -> float:
    """Token-multiset F1 between prediction and gold (both normalized)."""
    pred = Counter(normalize_answer(prediction))
    ref = Counter(normalize_answer(gold))
    overlap = sum((pred & ref).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(pred.values())
    recall = overlap / sum(ref.values())
    return 2 * precision * recall / (precision + recall)


def recall_at_k(results: Sequence[str] | Sequence[tuple[str, float]],
                gold_doc: str, k: int) -> int:
    """1 iff `gold_doc` appears within the first k ranked results."""
    top = list(results)[:k]
    ids = [r[0] if isinstance(r, tuple) else r for r in top]
    return int(gold_doc in ids)


# -- benchmark harness -------------------------------------------------------


class _SupportLake:
    """Adapter exposing supporting texts as retrievable documents."""

    def __init__(self, qasets: Iterable[QASet], lang: str):
        self.docs: dict[str, Document] = {}
        for qa in qasets:
            if not qa.supporting_text:
                continue
            self.docs[qa.id] = Document(
                id=qa.id, title=question_of(qa, lang),
                body=qa.supporting_text, language=lang,
                source=SourceRef(origin_name=f"qa-set {qa.id}"),
                kind="abstract")

    def get_document(self, doc_id: str) -> Document:
        return self.docs[doc_id]

    def texts(self) -> Mapping[str, str]:
        return {doc_id: doc.body for doc_id, doc in self.docs.items()}


def run_benchmark(task: str, qasets: Sequence[QASet], k: int = 5,
                  cfg: QaConfig | None = None, lang: str = "en",
                  ) -> BenchmarkReport:
    """Evaluate one benchmark task over `qasets` using their supporting
    texts as the corpus. Returns per-task standard metrics."""
    from .retriever import build_index

    if task not in BENCHMARK_TASKS:
        raise ValueError(f"unknown benchmark task {task!r}")
    cfg = cfg or QaConfig()
    support = _SupportLake(qasets, lang)
    if not support.docs:
        raise ValueError("benchmark needs QA sets with supporting texts")
    index = build_index(support.texts())

    metrics: dict[str, float] = {}
    n = 0
    if task == "mrc":
        em_sum = f1_sum = 0.0
        for qa in qasets:
            if qa.id not in support.docs:
                continue
            n += 1
            hit = extract_answer(question_of(qa, lang),
                                 [support.get_document(qa.id)], index)
            pred = hit.sentence if hit else ""
            em_sum += exact_match(pred, answer_of(qa, lang))
            f1_sum += token_f1(pred, answer_of(qa, lang))
        metrics = {"exact_match": em_sum / n, "token_f1": f1_sum / n}
    elif task == "ir":
        total = 0
        for qa in qasets:
            if qa.id not in support.docs:
                continue
            n += 1
            hits = bm25_search(index, RetrievalQuery(question_of(qa, lang),
                                                     k=k))
            total += recall_at_k(hits, qa.id, k)
        metrics = {f"recall_at_{k}": total / n}
    elif task == "open-qa":
        em_sum = f1_sum = 0.0
        for qa in qasets:
            if qa.id not in support.docs:
                continue
            n += 1
            answer = answer_question(question_of(qa, lang), index, support,
                                     k=k, cfg=cfg)
            em_sum += exact_match(answer.text, answer_of(qa, lang))
            f1_sum += token_f1(answer.text, answer_of(qa, lang))
        metrics = {"exact_match": em_sum / n, "token_f1": f1_sum / n}
    elif task == "answer-triggering":
        correct = 0
        for qa in qasets:
            if qa.meaningfulness_likert is None or qa.id not in support.docs:
                continue
            n += 1
            gold = likert_to_binary(qa.meaningfulness_likert,
                                    cfg.likert_threshold)
            answer = answer_question(question_of(qa, lang), index, support,
                                     k=k, cfg=cfg)
            correct += int(int(answer.triggered) == gold)
        metrics = {"accuracy": correct / n}
    elif task == "multiple-choice":
        correct = 0
        for qa in qasets:
            if qa.mc_alternatives is None or qa.id not in support.docs:
                continue
            n += 1
            choice = select_mc_answer(question_of(qa, lang),
                                      qa.mc_alternatives, index, support, k=k)
            correct += int(choice.index == qa.mc_correct_index)
        metrics = {"accuracy": correct / n}
    if n == 0:
        raise ValueError(f"no QA sets usable for task {task!r}")
    for name, value in metrics.items():
        if not 0.0 <= value <= 1.0:
            raise AssertionError(f"metric {name} out of range: {value}")
    return BenchmarkReport(task=task, metrics=metrics, n_examples=n)
