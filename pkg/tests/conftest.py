from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from maris.datalake import DataLake, Document
from maris.nl2sql import DomainSchema, SqlStore, default_grammar
from maris.retriever import build_index

FIXTURES = Path(__file__).parent / "fixtures"


def load_jsonl(path: Path) -> list[dict]:
    return [json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()]


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_records() -> list[dict]:
    return load_jsonl(FIXTURES / "corpus.jsonl")


@pytest.fixture(scope="session")
def corpus_docs(corpus_records) -> list[Document]:
    return [Document.from_dict(raw) for raw in corpus_records]


@pytest.fixture(scope="session")
def corpus_texts(corpus_docs) -> dict[str, str]:
    return {d.id: d.body for d in corpus_docs}


@pytest.fixture(scope="session")
def corpus_index(corpus_texts):
    return build_index(corpus_texts)


@pytest.fixture()
def lake(tmp_path) -> DataLake:
    lake = DataLake(tmp_path / "lake")
    lake.ingest_documents(FIXTURES / "corpus.jsonl", kind="article")
    return lake


@pytest.fixture(scope="session")
def qa_cases() -> list[dict]:
    return load_jsonl(FIXTURES / "qa_questions.jsonl")


@pytest.fixture(scope="session")
def unanswerable_cases() -> list[dict]:
    return load_jsonl(FIXTURES / "unanswerable.jsonl")


@pytest.fixture(scope="session")
def sql_schema() -> DomainSchema:
    return DomainSchema.load(FIXTURES / "sql" / "schema.yaml")


@pytest.fixture(scope="session")
def sql_store(sql_schema) -> SqlStore:
    return SqlStore.load(sql_schema, FIXTURES / "sql" / "store")


@pytest.fixture(scope="session")
def grammar():
    return default_grammar()


class MappingLake:
    """Minimal get_document provider over an in-memory document dict."""

    def __init__(self, docs: dict[str, Document]):
        self.docs = docs

    def get_document(self, doc_id: str) -> Document:
        return self.docs[doc_id]


@pytest.fixture(scope="session")
def corpus_lake(corpus_docs) -> MappingLake:
    return MappingLake({d.id: d for d in corpus_docs})
