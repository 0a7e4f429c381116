"""File-backed data lake: documents, wiki entries, QA sets, structured records.

Everything is stored in its original format as UTF-8 JSON-lines files,
one directory per record family and one file per document kind or
stream, plus a manifest mapping document ids to byte offsets. Bodies
are never normalized at ingest; consumers (retriever, harvesters) do
their own tokenization.

Writes are exclusive and atomic per batch: a batch is fully validated
before anything is written, files are replaced via rename, and readers
served from the in-memory snapshot see pre- or post-batch state only.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable

logger = logging.getLogger(__name__)

DOCUMENT_KINDS = ("wiki", "report", "article", "abstract", "news")
WIKI_AXES = ("socio-environmental", "biodiversity", "physicochemical",
             "legislation-and-governance")
LANGUAGES = ("pt", "en")


class LakeError(Exception):
    """Base error for data-lake operations."""


class IngestError(LakeError):
    """A batch was rejected; nothing from it was stored."""


class SchemaError(IngestError):
    """A structured record did not match its stream schema."""


class NotFoundError(LakeError):
    """Lookup of an unknown id/slug."""


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp; 'Z' suffix and naive times are UTC."""
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


@dataclass(frozen=True)
class SourceRef:
    origin_name: str
    origin_url_or_citation: str = ""
    retrieved_at: str = ""

    def to_dict(self) -> dict[str, str]:
        return {"origin_name": self.origin_name,
                "origin_url_or_citation": self.origin_url_or_citation,
                "retrieved_at": self.retrieved_at}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "SourceRef":
        return cls(origin_name=str(raw.get("origin_name", "")),
                   origin_url_or_citation=str(
                       raw.get("origin_url_or_citation", "")),
                   retrieved_at=str(raw.get("retrieved_at", "")))


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    body: str
    language: str
    source: SourceRef
    kind: str

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "title": self.title, "body": self.body,
                "language": self.language, "source": self.source.to_dict(),
                "kind": self.kind}

    @classmethod
    def from_dict(cls, raw: dict[str, Any], default_kind: str | None = None,
                  ) -> "Document":
        kind = raw.get("kind", default_kind)
        doc = cls(id=str(raw.get("id", "")), title=str(raw.get("title", "")),
                  body=str(raw.get("body", "")),
                  language=str(raw.get("language", "")),
                  source=SourceRef.from_dict(raw.get("source") or {}),
                  kind=str(kind) if kind else "")
        doc.validate()
        return doc

    def validate(self) -> None:
        if not self.id:
            raise IngestError("document id must be non-empty")
        if not self.body:
            raise IngestError(f"document {self.id!r}: body must be non-empty")
        if self.language not in LANGUAGES:
            raise IngestError(
                f"document {self.id!r}: unsupported language "
                f"{self.language!r} (expected one of {LANGUAGES})")
        if self.kind not in DOCUMENT_KINDS:
            raise IngestError(
                f"document {self.id!r}: unknown kind {self.kind!r}")
        if not self.source.origin_name:
            raise IngestError(
                f"document {self.id!r}: source.origin_name must be non-empty")


@dataclass(frozen=True)
class WikiEntry:
    slug: str
    title: str
    axis: str
    body: str

    def to_dict(self) -> dict[str, str]:
        return {"slug": self.slug, "title": self.title, "axis": self.axis,
                "body": self.body}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "WikiEntry":
        entry = cls(slug=str(raw.get("slug", "")),
                    title=str(raw.get("title", "")),
                    axis=str(raw.get("axis", "")),
                    body=str(raw.get("body", "")))
        if not entry.slug:
            raise IngestError("wiki entry slug must be non-empty")
        if entry.axis not in WIKI_AXES:
            raise IngestError(
                f"wiki entry {entry.slug!r}: axis {entry.axis!r} not one of "
                f"{WIKI_AXES}")
        return entry


@dataclass(frozen=True)
class QASet:
    """One question/answer set with evaluation metadata.

    mc_alternatives, when present, holds exactly five candidate answers
    and mc_correct_index addresses the true one.
    """

    id: str
    question_pt: str = ""
    question_en: str = ""
    answer_pt: str = ""
    answer_en: str = ""
    supporting_text: str = ""
    paraphrases: tuple[str, ...] = ()
    meaningfulness_likert: int | None = None
    mc_alternatives: tuple[str, ...] | None = None
    mc_correct_index: int | None = None

    def to_dict(self) -> dict[str, Any]:
        raw: dict[str, Any] = {
            "id": self.id, "question_pt": self.question_pt,
            "question_en": self.question_en, "answer_pt": self.answer_pt,
            "answer_en": self.answer_en,
            "supporting_text": self.supporting_text,
            "paraphrases": list(self.paraphrases),
        }
        if self.meaningfulness_likert is not None:
            raw["meaningfulness_likert"] = self.meaningfulness_likert
        if self.mc_alternatives is not None:
            raw["mc_alternatives"] = list(self.mc_alternatives)
            raw["mc_correct_index"] = self.mc_correct_index
        return raw

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "QASet":
        alternatives = raw.get("mc_alternatives")
        qa = cls(
            id=str(raw.get("id", "")),
            question_pt=str(raw.get("question_pt", "")),
            question_en=str(raw.get("question_en", "")),
            answer_pt=str(raw.get("answer_pt", "")),
            answer_en=str(raw.get("answer_en", "")),
            supporting_text=str(raw.get("supporting_text", "")),
            paraphrases=tuple(raw.get("paraphrases", ())),
            meaningfulness_likert=raw.get("meaningfulness_likert"),
            mc_alternatives=tuple(alternatives) if alternatives else None,
            mc_correct_index=raw.get("mc_correct_index"),
        )
        qa.validate()
        return qa

    def validate(self) -> None:
        if not self.id:
            raise IngestError("QA set id must be non-empty")
        lik = self.meaningfulness_likert
        if lik is not None and lik not in (1, 2, 3, 4, 5):
            raise IngestError(
                f"QA set {self.id!r}: likert rating {lik!r} out of 1..5")
        if self.mc_alternatives is not None:
            if len(self.mc_alternatives) != 5:
                raise IngestError(
                    f"QA set {self.id!r}: multiple choice needs exactly 5 "
                    f"alternatives, got {len(self.mc_alternatives)}")
            idx = self.mc_correct_index
            if idx is None or not 0 <= idx <= 4:
                raise IngestError(
                    f"QA set {self.id!r}: mc_correct_index {idx!r} out of 0..4")
            if self.mc_alternatives[idx] not in (self.answer_pt,
                                                 self.answer_en):
                raise IngestError(
                    f"QA set {self.id!r}: alternative at mc_correct_index "
                    f"does not match the answer")


@dataclass(frozen=True)
class StructuredRecord:
    stream: str
    station_or_region: str
    observed_at: str
    payload: dict[str, Any] = field(default_factory=dict)

    @property
    def observed_dt(self) -> datetime:
        return parse_timestamp(self.observed_at)

    def to_dict(self) -> dict[str, Any]:
        return {"stream": self.stream,
                "station_or_region": self.station_or_region,
                "observed_at": self.observed_at, "payload": dict(self.payload)}

    @classmethod
    def from_dict(cls, raw: dict[str, Any], stream: str,
                  schema: dict[str, dict[str, Any]]) -> "StructuredRecord":
        rec = cls(stream=stream,
                  station_or_region=str(raw.get("station_or_region", "")),
                  observed_at=str(raw.get("observed_at", "")),
                  payload=dict(raw.get("payload") or {}))
        rec.validate(schema)
        return rec

    def validate(self, schema: dict[str, dict[str, Any]]) -> None:
        if not self.station_or_region:
            raise SchemaError(f"{self.stream}: station_or_region is required")
        try:
            parse_timestamp(self.observed_at)
        except ValueError as exc:
            raise SchemaError(
                f"{self.stream}: bad observed_at {self.observed_at!r}: {exc}"
            ) from exc
        for name, spec in schema.items():
            if spec.get("required") and name not in self.payload:
                raise SchemaError(
                    f"{self.stream}: missing required field {name!r}")
        for name, value in self.payload.items():
            if name not in schema:
                raise SchemaError(
                    f"{self.stream}: undeclared field {name!r}")
            expected = schema[name].get("type", "number")
            if expected == "number":
                if isinstance(value, bool) or not isinstance(
                        value, (int, float)):
                    raise SchemaError(
                        f"{self.stream}: field {name!r} must be a number, "
                        f"got {type(value).__name__}")
            elif expected == "text" and not isinstance(value, str):
                raise SchemaError(
                    f"{self.stream}: field {name!r} must be text, "
                    f"got {type(value).__name__}")


def read_jsonl(path: str | Path) -> Iterable[tuple[int, dict[str, Any]]]:
    """Yield (1-based line number, parsed object) for each non-blank line."""
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(
                    f"{path}: malformed record on line {lineno}: {exc.msg}"
                ) from exc
            if not isinstance(obj, dict):
                raise IngestError(
                    f"{path}: malformed record on line {lineno}: "
                    f"expected an object")
            yield lineno, obj


def _atomic_write(path: Path, lines: list[str]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("".join(lines), encoding="utf-8")
    tmp.replace(path)


class DataLake:
    """Directory-backed store for all record families.

    Layout under the root:
        manifest.json           id -> {kind, offset} for documents
        documents/<kind>.jsonl
        structured/<stream>.jsonl
        wiki/entries.jsonl
        qa/sets.jsonl
    """

    def __init__(self, root: str | Path,
                 stream_schemas: dict[str, dict[str, Any]] | None = None):
        from .config import STREAM_SCHEMAS
        self.root = Path(root)
        self.stream_schemas = stream_schemas or STREAM_SCHEMAS
        self._lock = threading.RLock()
        self._documents: dict[str, Document] = {}
        self._wiki: dict[str, WikiEntry] = {}
        self._qasets: dict[str, QASet] = {}
        self._structured: dict[str, list[StructuredRecord]] = {}
        for sub in ("documents", "structured", "wiki", "qa"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._load()

    # -- loading -----------------------------------------------------------

    def _load(self) -> None:
        for path in sorted((self.root / "documents").glob("*.jsonl")):
            kind = path.stem
            for _, raw in read_jsonl(path):
                doc = Document.from_dict(raw, default_kind=kind)
                self._documents[doc.id] = doc
        wiki_path = self.root / "wiki" / "entries.jsonl"
        if wiki_path.exists():
            for _, raw in read_jsonl(wiki_path):
                entry = WikiEntry.from_dict(raw)
                self._wiki[entry.slug] = entry
        qa_path = self.root / "qa" / "sets.jsonl"
        if qa_path.exists():
            for _, raw in read_jsonl(qa_path):
                qa = QASet.from_dict(raw)
                self._qasets[qa.id] = qa
        for path in sorted((self.root / "structured").glob("*.jsonl")):
            stream = path.stem
            schema = self.stream_schemas.get(stream, {})
            records = [StructuredRecord.from_dict(raw, stream, schema)
                       for _, raw in read_jsonl(path)]
            records.sort(key=lambda r: r.observed_dt)
            self._structured[stream] = records

    # -- documents ---------------------------------------------------------

    def ingest_documents(self, path: str | Path, kind: str) -> int:
        """Ingest a JSON-lines corpus file; returns the record count.

        The whole batch is validated first: a duplicate id within the
        batch or a same-id/different-content clash with the store
        rejects the file. Re-ingesting identical records is a no-op
        that still counts them, so ingestion is idempotent per id.
        """
        if kind not in DOCUMENT_KINDS:
            raise IngestError(f"unknown document kind {kind!r}")
        batch: dict[str, Document] = {}
        seen_lines: dict[str, int] = {}
        count = 0
        for lineno, raw in read_jsonl(path):
            try:
                doc = Document.from_dict(raw, default_kind=kind)
            except IngestError as exc:
                raise IngestError(f"{path}: line {lineno}: {exc}") from exc
            if doc.id in seen_lines:
                raise IngestError(
                    f"{path}: line {lineno}: duplicate id {doc.id!r} "
                    f"(first seen on line {seen_lines[doc.id]})")
            seen_lines[doc.id] = lineno
            existing = self._documents.get(doc.id)
            if existing is not None and existing != doc:
                raise IngestError(
                    f"{path}: line {lineno}: id {doc.id!r} already stored "
                    f"with different content")
            count += 1
            if existing is None:
                batch[doc.id] = doc
        with self._lock:
            if batch:
                docs = dict(self._documents)
                docs.update(batch)
                self._documents = docs
                self._persist_documents({d.kind for d in batch.values()})
        logger.info("ingested %d document(s) from %s", count, path)
        return count

    def _persist_documents(self, kinds: Iterable[str]) -> None:
        by_kind: dict[str, list[Document]] = {}
        for doc in self._documents.values():
            by_kind.setdefault(doc.kind, []).append(doc)
        for kind in kinds:
            docs = sorted(by_kind.get(kind, []), key=lambda d: d.id)
            _atomic_write(
                self.root / "documents" / f"{kind}.jsonl",
                [json.dumps(d.to_dict(), ensure_ascii=False) + "\n"
                 for d in docs])
        self._write_manifest(by_kind)

    def _write_manifest(self, by_kind: dict[str, list[Document]]) -> None:
        entries: dict[str, dict[str, Any]] = {}
        for kind, docs in by_kind.items():
            offset = 0
            for doc in sorted(docs, key=lambda d: d.id):
                line = json.dumps(doc.to_dict(), ensure_ascii=False) + "\n"
                entries[doc.id] = {"kind": kind, "offset": offset}
                offset += len(line.encode("utf-8"))
        manifest = {"documents": entries}
        _atomic_write(self.root / "manifest.json",
                      [json.dumps(manifest, ensure_ascii=False, indent=2)])

    def get_document(self, doc_id: str) -> Document:
        doc = self._documents.get(doc_id)
        if doc is None:
            raise NotFoundError(f"no document with id {doc_id!r}")
        return doc

    def list_documents(self, kind: str | None = None,
                       language: str | None = None) -> list[Document]:
        docs = [d for d in self._documents.values()
                if (kind is None or d.kind == kind)
                and (language is None or d.language == language)]
        return sorted(docs, key=lambda d: d.id)

    def document_count(self) -> int:
        return len(self._documents)

    # -- wiki entries ------------------------------------------------------

    def ingest_wiki(self, path: str | Path) -> int:
        batch: dict[str, WikiEntry] = {}
        count = 0
        for lineno, raw in read_jsonl(path):
            try:
                entry = WikiEntry.from_dict(raw)
            except IngestError as exc:
                raise IngestError(f"{path}: line {lineno}: {exc}") from exc
            if entry.slug in batch:
                raise IngestError(
                    f"{path}: line {lineno}: duplicate slug {entry.slug!r}")
            existing = self._wiki.get(entry.slug)
            if existing is not None and existing != entry:
                raise IngestError(
                    f"{path}: line {lineno}: slug {entry.slug!r} already "
                    f"stored with different content")
            count += 1
            if existing is None:
                batch[entry.slug] = entry
        with self._lock:
            if batch:
                wiki = dict(self._wiki)
                wiki.update(batch)
                self._wiki = wiki
                _atomic_write(
                    self.root / "wiki" / "entries.jsonl",
                    [json.dumps(e.to_dict(), ensure_ascii=False) + "\n"
                     for e in sorted(wiki.values(), key=lambda e: e.slug)])
        return count

    def get_wiki(self, slug: str) -> WikiEntry:
        entry = self._wiki.get(slug)
        if entry is None:
            raise NotFoundError(f"no wiki entry with slug {slug!r}")
        return entry

    def list_wiki(self, axis: str | None = None) -> list[WikiEntry]:
        entries = [e for e in self._wiki.values()
                   if axis is None or e.axis == axis]
        return sorted(entries, key=lambda e: e.slug)

    # -- QA sets -----------------------------------------------------------

    def ingest_qasets(self, path: str | Path) -> int:
        batch: dict[str, QASet] = {}
        count = 0
        for lineno, raw in read_jsonl(path):
            try:
                qa = QASet.from_dict(raw)
            except IngestError as exc:
                raise IngestError(f"{path}: line {lineno}: {exc}") from exc
            if qa.id in batch:
                raise IngestError(
                    f"{path}: line {lineno}: duplicate id {qa.id!r}")
            existing = self._qasets.get(qa.id)
            if existing is not None and existing != qa:
                raise IngestError(
                    f"{path}: line {lineno}: id {qa.id!r} already stored "
                    f"with different content")
            count += 1
            if existing is None:
                batch[qa.id] = qa
        with self._lock:
            if batch:
                qasets = dict(self._qasets)
                qasets.update(batch)
                self._qasets = qasets
                _atomic_write(
                    self.root / "qa" / "sets.jsonl",
                    [json.dumps(q.to_dict(), ensure_ascii=False) + "\n"
                     for q in sorted(qasets.values(), key=lambda q: q.id)])
        return count

    def get_qaset(self, qa_id: str) -> QASet:
        qa = self._qasets.get(qa_id)
        if qa is None:
            raise NotFoundError(f"no QA set with id {qa_id!r}")
        return qa

    def list_qasets(self) -> list[QASet]:
        return sorted(self._qasets.values(), key=lambda q: q.id)

    # -- structured records --------------------------------------------------

    def ingest_structured(self, path: str | Path, stream: str) -> int:
        if stream not in self.stream_schemas:
            raise SchemaError(f"unknown stream {stream!r}")
        schema = self.stream_schemas[stream]
        batch: list[StructuredRecord] = []
        for lineno, raw in read_jsonl(path):
            try:
                batch.append(StructuredRecord.from_dict(raw, stream, schema))
            except SchemaError as exc:
                raise SchemaError(f"{path}: line {lineno}: {exc}") from exc
        with self._lock:
            records = list(self._structured.get(stream, ())) + batch
            records.sort(key=lambda r: r.observed_dt)
            self._structured[stream] = records
            _atomic_write(
                self.root / "structured" / f"{stream}.jsonl",
                [json.dumps(r.to_dict(), ensure_ascii=False) + "\n"
                 for r in records])
        return len(batch)

    def query_structured(self, stream: str,
                         start: datetime | str | None = None,
                         end: datetime | str | None = None,
                         ) -> list[StructuredRecord]:
        """Records of `stream` with observed_at in [start, end], sorted."""
        records = self._structured.get(stream, [])
        lo = parse_timestamp(start) if isinstance(start, str) else start
        hi = parse_timestamp(end) if isinstance(end, str) else end
        out = []
        for rec in records:
            ts = rec.observed_dt
            if lo is not None and ts < lo:
                continue
            if hi is not None and ts > hi:
                continue
            out.append(rec)
        return out
