"""Knowledge-graph harvesting: triples, synonym merge, narrowing, linking.

The pipeline runs in four steps. Subject-verb-object triples are pulled
from each document with deterministic patterns over a verb lexicon.
Entities within a document whose embeddings are close enough are merged
into synonym groups (transitive closure). Each group is then narrowed
to its most recurring member. Finally, entities in separate document
graphs are connected by "bridges": cross-document links that record
similarity without collapsing the two contexts into one node.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .config import SVO_VERBS
from .datalake import Document
from .embeddings import EmbeddingStore, cosine
from .text import split_sentences, tokenize

# Tokens stripped from the edges of extracted entity spans.
DETERMINERS = frozenset([
    "the", "a", "an", "this", "that", "these", "those", "its", "their",
    "o", "os", "as", "um", "uma", "este", "esta", "seu", "sua",
])

# Coordinating tokens that split a span into several entities.
COORDINATORS = frozenset(["and", "e"])


@dataclass(frozen=True)
class Triple:
    """One ⟨subject, relation, object⟩ assertion with provenance."""

    subject: str
    relation: str
    object: str
    doc_id: str
    sentence_index: int

    def __post_init__(self) -> None:
        if not (self.subject and self.relation and self.object):
            raise ValueError(
                f"triple slots must be non-empty: "
                f"({self.subject!r}, {self.relation!r}, {self.object!r})")


@dataclass(frozen=True)
class Edge:
    subject: str
    relation: str
    object: str
    doc_id: str
    sentence_index: int


@dataclass(frozen=True)
class Node:
    doc_id: str
    entity: str


@dataclass(frozen=True)
class Bridge:
    a: Node
    b: Node
    similarity: float


@dataclass(frozen=True)
class SynonymGraph:
    """Per-document graph whose nodes are synonym groups of entities."""

    doc_id: str
    groups: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[int, str, int, int], ...]  # (subj grp, rel, obj grp, sent)
    entity_counts: dict[str, int] = field(default_factory=dict)

    def group_of(self, entity: str) -> int:
        for idx, group in enumerate(self.groups):
            if entity in group:
                return idx
        raise KeyError(entity)


@dataclass(frozen=True)
class DocGraph:
    """Narrowed per-document graph: one representative entity per group."""

    doc_id: str
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]


@dataclass(frozen=True)
class KnowledgeGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    bridges: tuple[Bridge, ...]


def _split_coordinated(tokens: Sequence[str]) -> list[list[str]]:
    parts: list[list[str]] = [[]]
    for tok in tokens:
        if tok in COORDINATORS:
            parts.append([])
        else:
            parts[-1].append(tok)
    return [p for p in parts if p]


def _clean_span(tokens: Sequence[str]) -> str:
    kept = [t for t in tokens if t not in DETERMINERS]
    return " ".join(kept)


def extract_triples(document: Document,
                    verbs: Iterable[str] = SVO_VERBS) -> list[Triple]:
    """Deterministic SVO extraction over the document's sentences.

    Per sentence, the first verb-lexicon token with at least one
    non-determiner token on each side anchors the pattern; subject and
    object spans are the cleaned token runs on either side, split on
    coordinating conjunctions into one triple per conjunct pair.
    Sentences with no match contribute nothing.
    """
    if not document.body:
        raise ValueError(f"document {document.id!r} has an empty body")
    verb_set = frozenset(verbs)
    triples: list[Triple] = []
    for sent_idx, sentence in enumerate(split_sentences(document.body)):
        tokens = tokenize(sentence)
        for pos, tok in enumerate(tokens):
            if tok not in verb_set:
                continue
            subject_spans = _split_coordinated(tokens[:pos])
            object_spans = _split_coordinated(tokens[pos + 1:])
            subjects = [s for s in map(_clean_span, subject_spans) if s]
            objects = [o for o in map(_clean_span, object_spans) if o]
            if not subjects or not objects:
                continue
            for subj in subjects:
                for obj in objects:
                    triples.append(Triple(subject=subj, relation=tok,
                                          object=obj, doc_id=document.id,
                                          sentence_index=sent_idx))
            break  # one anchor verb per sentence
    return triples


def merge_synonyms(triples: Sequence[Triple], embeddings: EmbeddingStore,
                   synonym_threshold: float = 0.85) -> SynonymGraph:
    """Group same-document entities whose cosine reaches the threshold.

    Grouping is the transitive closure of the pairwise relation, so it
    always forms a partition of the entity set. Entities without an
    embedding stay in singleton groups.
    """
    if not triples:
        return SynonymGraph(doc_id="", groups=(), edges=())
    doc_ids = {t.doc_id for t in triples}
    if len(doc_ids) != 1:
        raise ValueError(
            f"merge_synonyms expects triples from one document, got "
            f"{sorted(doc_ids)}")
    doc_id = triples[0].doc_id

    counts: dict[str, int] = {}
    for t in triples:
        counts[t.subject] = counts.get(t.subject, 0) + 1
        counts[t.object] = counts.get(t.object, 0) + 1
    entities = sorted(counts)

    parent = {e: e for e in entities}

    def find(e: str) -> str:
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for i, ent_a in enumerate(entities):
        vec_a = embeddings.get(ent_a)
        if vec_a is None:
            continue
        for ent_b in entities[i + 1:]:
            vec_b = embeddings.get(ent_b)
            if vec_b is None:
                continue
            if cosine(vec_a, vec_b) >= synonym_threshold:
                union(ent_a, ent_b)

    members: dict[str, list[str]] = {}
    for e in entities:
        members.setdefault(find(e), []).append(e)
    groups = tuple(sorted(tuple(sorted(g)) for g in members.values()))
    group_index = {e: i for i, grp in enumerate(groups) for e in grp}

    edges = tuple(
        (group_index[t.subject], t.relation, group_index[t.object],
         t.sentence_index)
        for t in triples)
    return SynonymGraph(doc_id=doc_id, groups=groups, edges=edges,
                        entity_counts=counts)


def narrow_graph(graph: SynonymGraph) -> DocGraph:
    """Replace each synonym group by its most recurring entity.

    Frequency is the entity's triple-occurrence count within the
    document; ties go to the lexicographically smallest member. The
    result has exactly one node per group and no synonym groups left.
    """
    representatives = []
    for group in graph.groups:
        representatives.append(
            min(group, key=lambda e: (-graph.entity_counts.get(e, 0), e)))
    edges = tuple(
        Edge(subject=representatives[s], relation=rel,
             object=representatives[o], doc_id=graph.doc_id,
             sentence_index=sent)
        for s, rel, o, sent in graph.edges)
    return DocGraph(doc_id=graph.doc_id, nodes=tuple(representatives),
                    edges=edges)


def link_graphs(graphs: Sequence[DocGraph], embeddings: EmbeddingStore,
                link_threshold: float = 0.80) -> KnowledgeGraph:
    """Union the per-document graphs and bridge similar cross-document nodes.

    A bridge is added for every pair of nodes from distinct documents
    whose embedding cosine reaches the threshold; nodes and edges are
    preserved untouched. Needs at least two graphs.
    """
    if len(graphs) < 2:
        raise ValueError("link_graphs needs at least two document graphs")
    nodes: list[Node] = []
    edges: list[Edge] = []
    for graph in graphs:
        nodes.extend(Node(graph.doc_id, e) for e in graph.nodes)
        edges.extend(graph.edges)

    bridges: list[Bridge] = []
    ordered = sorted(nodes, key=lambda n: (n.doc_id, n.entity))
    for i, node_a in enumerate(ordered):
        vec_a = embeddings.get(node_a.entity)
        if vec_a is None:
            continue
        for node_b in ordered[i + 1:]:
            if node_b.doc_id == node_a.doc_id:
                continue
            vec_b = embeddings.get(node_b.entity)
            if vec_b is None:
                continue
            sim = cosine(vec_a, vec_b)
            if sim >= link_threshold:
                bridges.append(Bridge(a=node_a, b=node_b, similarity=sim))
    return KnowledgeGraph(nodes=tuple(nodes), edges=tuple(edges),
                          bridges=tuple(bridges))


def harvest_graph(documents: Sequence[Document], embeddings: EmbeddingStore,
                  synonym_threshold: float = 0.85,
                  link_threshold: float = 0.80,
                  verbs: Iterable[str] = SVO_VERBS) -> KnowledgeGraph:
    """Full pipeline over a document set: extract, merge, narrow, link."""
    doc_graphs = []
    for doc in documents:
        triples = extract_triples(doc, verbs)
        if not triples:
            continue
        doc_graphs.append(
            narrow_graph(merge_synonyms(triples, embeddings,
                                        synonym_threshold)))
    if len(doc_graphs) < 2:
        raise ValueError(
            "need triples from at least two documents to build a linked graph")
    return link_graphs(doc_graphs, embeddings, link_threshold)


def save_graph(graph: KnowledgeGraph, path: str | Path) -> None:
    """Write the graph as line-delimited node/edge/bridge records."""
    lines = []
    for node in graph.nodes:
        lines.append(json.dumps(
            {"type": "node", "doc_id": node.doc_id, "entity": node.entity},
            ensure_ascii=False) + "\n")
    for edge in graph.edges:
        lines.append(json.dumps(
            {"type": "edge", "subject": edge.subject,
             "relation": edge.relation, "object": edge.object,
             "doc_id": edge.doc_id, "sentence_index": edge.sentence_index},
            ensure_ascii=False) + "\n")
    for bridge in graph.bridges:
        lines.append(json.dumps(
            {"type": "bridge", "a_doc": bridge.a.doc_id,
             "a_entity": bridge.a.entity, "b_doc": bridge.b.doc_id,
             "b_entity": bridge.b.entity, "similarity": bridge.similarity},
            ensure_ascii=False) + "\n")
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_graph(path: str | Path) -> KnowledgeGraph:
    nodes: list[Node] = []
    edges: list[Edge] = []
    bridges: list[Bridge] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        raw = json.loads(line)
        if raw["type"] == "node":
            nodes.append(Node(raw["doc_id"], raw["entity"]))
        elif raw["type"] == "edge":
            edges.append(Edge(raw["subject"], raw["relation"], raw["object"],
                              raw["doc_id"], raw["sentence_index"]))
        elif raw["type"] == "bridge":
            bridges.append(Bridge(Node(raw["a_doc"], raw["a_entity"]),
                                  Node(raw["b_doc"], raw["b_entity"]),
                                  raw["similarity"]))
    return KnowledgeGraph(nodes=tuple(nodes), edges=tuple(edges),
                          bridges=tuple(bridges))
