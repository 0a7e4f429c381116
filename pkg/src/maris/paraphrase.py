"""Lexical paraphrase generation and the metrics used to compare variants.

Variants are produced by single-token synonym swaps from a lexicon, so
every variant keeps the source's token count and differs in at least
one token. The evaluation harness reports, per variant, BLEU with the
brevity penalty omitted (diversity axis: lower = more diverse) and the
cosine dissimilarity of sentence embeddings (fidelity axis: lower =
closer in meaning). The embedding encoder is pluggable; the default is
the mean of token vectors from the shared embedding store.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, product
from pathlib import Path
from random import Random

import numpy as np

from .embeddings import EmbeddingStore, cosine, sentence_vector
from .text import tokenize

_WORD_CORE = re.compile(r"^(\W*)([\w-]+)(\W*)$", re.UNICODE)


class LexiconError(ValueError):
    pass


@dataclass
class SynonymLexicon:
    """Single-token substitution table: (lang, form) -> substitutes."""

    entries: dict[tuple[str, str], tuple[str, ...]] = field(
        default_factory=dict)

    def add(self, lang: str, form: str, substitutes: list[str]) -> None:
        form = form.casefold()
        subs = tuple(dict.fromkeys(
            s.casefold() for s in substitutes if s.casefold() != form))
        if not subs:
            raise LexiconError(
                f"entry {form!r} maps only to itself; needs a real substitute")
        for word in (form, *subs):
            if len(tokenize(word)) != 1:
                raise LexiconError(
                    f"entry {form!r}: {word!r} is not a single word token")
        self.entries[(lang, form)] = subs

    def substitutes(self, lang: str, form: str) -> tuple[str, ...]:
        return self.entries.get((lang, form.casefold()), ())

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def load(cls, path: str | Path) -> "SynonymLexicon":
        """Parse a line-delimited lexicon: `lang form substitute...`."""
        lexicon = cls()
        for lineno, line in enumerate(
                Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 3:
                raise LexiconError(
                    f"{path}: line {lineno}: expected `lang form substitute...`")
            lexicon.add(parts[0], parts[1], parts[2:])
        return lexicon


@dataclass
class ParaphraseSet:
    source: str
    variants: list[str] = field(default_factory=list)
    metrics: list[dict[str, float]] = field(default_factory=list)


def _match_core(token: str) -> tuple[str, str, str] | None:
    match = _WORD_CORE.match(token)
    if match is None:
        return None
    return match.group(1), match.group(2), match.group(3)


def _apply_case(original: str, substitute: str) -> str:
    if original.isupper() and len(original) > 1:
        return substitute.upper()
    if original[:1].isupper():
        return substitute[:1].upper() + substitute[1:]
    return substitute


def generate_paraphrases(sentence: str, lexicon: SynonymLexicon,
                         max_variants: int = 5, seed: int = 0,
                         lang: str = "en") -> ParaphraseSet:
    """Up to `max_variants` distinct single-token-swap variants.

    Substitution sites are whitespace tokens whose word core appears in
    the lexicon; variants swap one or more sites, smaller swap counts
    first, with the seed shuffling the order within each swap count.
    No duplicates; a sentence without substitutable tokens yields an
    empty variant list.
    """
    if len(lexicon) == 0:
        raise LexiconError("lexicon is empty")
    rng = Random(seed)
    tokens = sentence.split()
    sites: list[tuple[int, str, str, str, tuple[str, ...]]] = []
    for idx, token in enumerate(tokens):
        core = _match_core(token)
        if core is None:
            continue
        prefix, word, suffix = core
        subs = lexicon.substitutes(lang, word)
        if subs:
            sites.append((idx, prefix, word, suffix, subs))

    result = ParaphraseSet(source=sentence)
    seen = {sentence}
    for size in range(1, len(sites) + 1):
        combos = list(combinations(range(len(sites)), size))
        rng.shuffle(combos)
        for combo in combos:
            option_lists = []
            for site_idx in combo:
                subs = list(sites[site_idx][4])
                rng.shuffle(subs)
                option_lists.append(subs)
            for picks in product(*option_lists):
                variant_tokens = list(tokens)
                for site_idx, substitute in zip(combo, picks):
                    pos, prefix, word, suffix, _ = sites[site_idx]
                    variant_tokens[pos] = (
                        prefix + _apply_case(word, substitute) + suffix)
                variant = " ".join(variant_tokens)
                if variant in seen:
                    continue
                seen.add(variant)
                result.variants.append(variant)
                if len(result.variants) >= max_variants:
                    return result
    return result


def bleu_no_bp(candidate: str, reference: str, max_n: int = 4) -> float:
    """Geometric mean of clipped n-gram precisions, brevity penalty omitted.

    Unsmoothed: any zero n-gram precision zeroes the whole score. The
    n range is capped at the candidate length so that identical short
    sentences still score 1.0. Empty inputs are an error.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        raise ValueError("bleu_no_bp needs non-empty candidate and reference")
    max_n = min(max_n, len(cand))
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_ngrams = Counter(tuple(cand[i:i + n])
                              for i in range(len(cand) - n + 1))
        ref_ngrams = Counter(tuple(ref[i:i + n])
                             for i in range(len(ref) - n + 1))
        clipped = sum((cand_ngrams & ref_ngrams).values())
        total = sum(cand_ngrams.values())
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    return math.exp(log_sum / max_n)


def cosine_dissimilarity(vec_a: np.ndarray, vec_b: np.ndarray) -> float:
    """1 - cosine(vec_a, vec_b), in [0, 2]. Zero vectors are an error."""
    return 1.0 - cosine(vec_a, vec_b)


def evaluate_paraphrases(pset: ParaphraseSet,
                         embeddings: EmbeddingStore | None = None,
                         ) -> ParaphraseSet:
    """Fill per-variant metrics: BLEU (no BP) always, embedding
    dissimilarity when both sentences have known tokens."""
    pset.metrics = []
    source_vec = (sentence_vector(pset.source, embeddings)
                  if embeddings is not None else None)
    for variant in pset.variants:
        scores: dict[str, float] = {
            "bleu_no_bp": bleu_no_bp(variant, pset.source)}
        if source_vec is not None and embeddings is not None:
            variant_vec = sentence_vector(variant, embeddings)
            if variant_vec is not None:
                scores["cosine_dissimilarity"] = cosine_dissimilarity(
                    variant_vec, source_vec)
        pset.metrics.append(scores)
    return pset
