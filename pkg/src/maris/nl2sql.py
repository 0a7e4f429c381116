"""Question classification and grammar-based NL-to-SQL translation.

A question is database-type when it carries an aggregation/listing cue
word and mentions at least one schema synonym; everything else routes
to open QA. Database-type questions are translated through a grammar
file mapping cue patterns to SQL templates; schema linking happens via
surface-form synonyms declared next to each table and column, and WHERE
literals resolve "of/in/for <entity>" phrases against the values of the
target table's text columns.

Execution runs the emitted SQL subset against an in-memory SQLite store
loaded from line-delimited fixture rows; result rows are ordered by
first column ascending for determinism.
"""

from __future__ import annotations

import re
import sqlite3
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import yaml

from .config import SQL_CUE_WORDS, WHERE_PREPOSITIONS
from .datalake import read_jsonl
from .kg import DETERMINERS
from .text import tokenize

COLUMN_TYPES = ("text", "integer", "real")
SHAPES = ("count", "select-where", "aggregate", "list")


class SchemaFileError(ValueError):
    pass


class TranslationError(ValueError):
    """Question matched no grammar production; fall back to open QA."""


class ExecutionError(ValueError):
    pass


@dataclass(frozen=True)
class Column:
    name: str
    type: str
    synonyms: tuple[str, ...] = ()


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]
    synonyms: tuple[str, ...] = ()

    def column(self, name: str) -> Column | None:
        for col in self.columns:
            if col.name == name:
                return col
        return None

    def text_columns(self) -> list[Column]:
        return [c for c in self.columns if c.type == "text"]

    def numeric_columns(self) -> list[Column]:
        return [c for c in self.columns if c.type in ("integer", "real")]


@dataclass(frozen=True)
class DomainSchema:
    tables: tuple[Table, ...]

    def __post_init__(self) -> None:
        names = [t.name for t in self.tables]
        if len(set(names)) != len(names):
            raise SchemaFileError("table names must be unique")
        owners: dict[str, str] = {}
        for table in self.tables:
            cols = [c.name for c in table.columns]
            if len(set(cols)) != len(cols):
                raise SchemaFileError(
                    f"column names in {table.name!r} must be unique")
            for syn in table.synonyms:
                self._claim(owners, syn, f"table {table.name}")
            for col in table.columns:
                if col.type not in COLUMN_TYPES:
                    raise SchemaFileError(
                        f"{table.name}.{col.name}: bad type {col.type!r}")
                for syn in col.synonyms:
                    self._claim(owners, syn, f"column {table.name}.{col.name}")

    @staticmethod
    def _claim(owners: dict[str, str], synonym: str, owner: str) -> None:
        key = " ".join(tokenize(synonym))
        if not key:
            raise SchemaFileError(f"empty synonym for {owner}")
        if key in owners and owners[key] != owner:
            raise SchemaFileError(
                f"synonym {synonym!r} maps to both {owners[key]} and {owner}")
        owners[key] = owner

    def table(self, name: str) -> Table | None:
        for t in self.tables:
            if t.name == name:
                return t
        return None

    @classmethod
    def load(cls, path: str | Path) -> "DomainSchema":
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        tables = []
        for tname, tdef in (raw.get("tables") or {}).items():
            columns = []
            for cname, cdef in (tdef.get("columns") or {}).items():
                columns.append(Column(
                    name=cname, type=str(cdef.get("type", "text")),
                    synonyms=tuple(cdef.get("synonyms", ()))))
            tables.append(Table(name=tname, columns=tuple(columns),
                                synonyms=tuple(tdef.get("synonyms", ()))))
        return cls(tables=tuple(tables))


@dataclass(frozen=True)
class SqlQuery:
    text: str
    shape: str

    def __post_init__(self) -> None:
        if self.shape not in SHAPES:
            raise ValueError(f"unknown query shape {self.shape!r}")


@dataclass(frozen=True)
class Production:
    name: str
    cues: tuple[str, ...]
    template: str
    shape: str


@dataclass(frozen=True)
class Grammar:
    productions: tuple[Production, ...]

    @classmethod
    def load(cls, path: str | Path) -> "Grammar":
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        productions = []
        for name, pdef in (raw.get("productions") or {}).items():
            productions.append(Production(
                name=name, cues=tuple(pdef["cues"]),
                template=str(pdef["template"]), shape=str(pdef["shape"])))
        if not productions:
            raise SchemaFileError(f"{path}: grammar file has no productions")
        return cls(productions=tuple(productions))

    def base_productions(self) -> list[Production]:
        return [p for p in self.productions if not p.name.endswith("_where")]

    def where_variant(self, name: str) -> Production | None:
        for p in self.productions:
            if p.name == f"{name}_where":
                return p
        return None


def default_grammar() -> Grammar:
    from importlib.resources import files

    return Grammar.load(Path(str(files("maris").joinpath(
        "data/sql_grammar.yaml"))))


# -- classification ----------------------------------------------------------


def _contains_phrase(tokens: Sequence[str], phrase: str) -> bool:
    needle = tokenize(phrase)
    if not needle:
        return False
    width = len(needle)
    return any(tokens[i:i + width] == needle
               for i in range(len(tokens) - width + 1))


def _schema_mentions(tokens: Sequence[str],
                     schema: DomainSchema) -> list[str]:
    mentions = []
    for table in schema.tables:
        for syn in (table.name, *table.synonyms):
            if _contains_phrase(tokens, syn):
                mentions.append(table.name)
                break
        for col in table.columns:
            for syn in (col.name, *col.synonyms):
                if _contains_phrase(tokens, syn):
                    mentions.append(f"{table.name}.{col.name}")
                    break
    return mentions


def classify_question(question: str, schema: DomainSchema,
                      cues: dict[str, list[str]] | None = None) -> str:
    """Route a question: 'sql-type' needs a cue word plus a schema
    mention; everything else is 'open-type'. Total and deterministic."""
    cues = cues or SQL_CUE_WORDS
    tokens = tokenize(question)
    has_cue = any(_contains_phrase(tokens, cue)
                  for lang_cues in cues.values() for cue in lang_cues)
    if not has_cue:
        return "open-type"
    if not _schema_mentions(tokens, schema):
        return "open-type"
    return "sql-type"


# -- fixture store -----------------------------------------------------------


class SqlStore:
    """In-memory SQLite store over line-delimited fixture rows.

    Tables and column types come from the schema; rows are loaded from
    `<table>.jsonl` files in the store directory. Queries are read-only
    and serialized by a lock, so concurrent callers are safe.
    """

    def __init__(self, schema: DomainSchema):
        self.schema = schema
        self._conn = sqlite3.connect(":memory:", check_same_thread=False)
        self._lock = threading.Lock()
        for table in schema.tables:
            cols = ", ".join(
                f'"{c.name}" {self._sqlite_type(c.type)}'
                for c in table.columns)
            self._conn.execute(f'CREATE TABLE "{table.name}" ({cols})')

    @staticmethod
    def _sqlite_type(col_type: str) -> str:
        return {"text": "TEXT", "integer": "INTEGER",
                "real": "REAL"}[col_type]

    def insert_rows(self, table_name: str,
                    rows: Iterable[dict[str, Any]]) -> int:
        table = self.schema.table(table_name)
        if table is None:
            raise ExecutionError(f"unknown table {table_name!r}")
        count = 0
        names = [c.name for c in table.columns]
        placeholders = ", ".join("?" for _ in names)
        with self._lock:
            for row in rows:
                values = [row.get(n) for n in names]
                self._conn.execute(
                    f'INSERT INTO "{table_name}" VALUES ({placeholders})',
                    values)
                count += 1
            self._conn.commit()
        return count

    @classmethod
    def load(cls, schema: DomainSchema, directory: str | Path) -> "SqlStore":
        store = cls(schema)
        for table in schema.tables:
            path = Path(directory) / f"{table.name}.jsonl"
            if path.exists():
                store.insert_rows(table.name,
                                  (raw for _, raw in read_jsonl(path)))
        return store

    def text_values(self, table_name: str, column: str) -> list[str]:
        with self._lock:
            rows = self._conn.execute(
                f'SELECT DISTINCT "{column}" FROM "{table_name}"').fetchall()
        return [str(r[0]) for r in rows if r[0] is not None]

    def run(self, sql_text: str) -> tuple[list[str], list[tuple]]:
        with self._lock:
            cursor = self._conn.execute(sql_text)
            columns = [d[0] for d in cursor.description]
            rows = [tuple(r) for r in cursor.fetchall()]
        return columns, rows


# -- translation -------------------------------------------------------------


@dataclass(frozen=True)
class ExecResult:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    empty_aggregate: bool = False


def _find_table(tokens: Sequence[str], schema: DomainSchema) -> Table | None:
    for table in schema.tables:
        for syn in (table.name, *table.synonyms):
            if _contains_phrase(tokens, syn):
                return table
    return None


def _find_column(tokens: Sequence[str], table: Table,
                 numeric_only: bool) -> Column | None:
    candidates = table.numeric_columns() if numeric_only else list(
        table.columns)
    for col in candidates:
        for syn in (col.name, *col.synonyms):
            if _contains_phrase(tokens, syn):
                return col
    return None


def _is_schema_phrase(phrase: str, schema: DomainSchema) -> bool:
    key = tokenize(phrase)
    for table in schema.tables:
        for syn in (table.name, *table.synonyms):
            if tokenize(syn) == key:
                return True
        for col in table.columns:
            for syn in (col.name, *col.synonyms):
                if tokenize(syn) == key:
                    return True
    return False


def _resolve_where(tokens: Sequence[str], table: Table,
                   schema: DomainSchema, store: SqlStore | None,
                   prepositions: Sequence[str],
                   ) -> tuple[str, str] | None:
    """Resolve an `of/in/for <entity>` phrase to (column, stored value).

    Candidate spans after each preposition are stripped of determiners
    and matched, leftmost span first and longest width first, against
    the distinct values of the table's text columns. Spans that are
    themselves schema synonyms are structural, not literals.
    """
    if store is None:
        return None
    prep_set = frozenset(prepositions)
    for pos, tok in enumerate(tokens):
        if tok not in prep_set:
            continue
        tail = [t for t in tokens[pos + 1:] if t not in DETERMINERS]
        for start in range(len(tail)):
            for width in range(min(4, len(tail) - start), 0, -1):
                phrase = " ".join(tail[start:start + width])
                if _is_schema_phrase(phrase, schema):
                    continue
                for col in table.text_columns():
                    for value in store.text_values(table.name, col.name):
                        if " ".join(tokenize(value)) == phrase:
                            return col.name, value
    return None


def translate(question: str, schema: DomainSchema,
              store: SqlStore | None = None,
              grammar: Grammar | None = None,
              prepositions: Sequence[str] | None = None) -> SqlQuery:
    """Map a database-type question to SQL through the grammar.

    Productions are tried in grammar-file order; the first whose cue
    matches wins, then the table, column, and optional WHERE literal
    are linked. Questions outside the grammar raise TranslationError
    so the caller can fall back to open QA.
    """
    grammar = grammar or default_grammar()
    prepositions = prepositions or WHERE_PREPOSITIONS
    tokens = tokenize(question)

    production = None
    for prod in grammar.base_productions():
        if any(_contains_phrase(tokens, cue) for cue in prod.cues):
            production = prod
            break
    if production is None:
        raise TranslationError(
            f"no grammar production matches: {question!r}")

    table = _find_table(tokens, schema)
    if table is None:
        raise TranslationError(
            f"no schema table mentioned in: {question!r}")

    values: dict[str, str] = {"table": table.name}
    if "{column}" in production.template:
        needs_numeric = production.shape == "aggregate"
        column = _find_column(tokens, table, numeric_only=needs_numeric)
        if column is None and production.shape == "list":
            text_cols = table.text_columns()
            column = text_cols[0] if text_cols else None
        if column is None:
            raise TranslationError(
                f"no usable column of {table.name!r} mentioned in: "
                f"{question!r}")
        values["column"] = column.name

    where = _resolve_where(tokens, table, schema, store, prepositions)
    if where is not None:
        where_col, literal = where
        variant = grammar.where_variant(production.name)
        if variant is not None:
            production = variant
        if "{where_column}" in production.template:
            values["where_column"] = where_col
            values["literal"] = literal.replace("'", "''")
    if "{where_column}" in production.template \
            and "where_column" not in values:
        raise TranslationError(
            f"no WHERE literal resolved for: {question!r}")

    return SqlQuery(text=production.template.format(**values),
                    shape=production.shape)


_SQL_PATTERNS = [
    re.compile(r"^SELECT COUNT\(\*\) FROM (?P<table>\w+)"
               r"(?: WHERE (?P<where>\w+) = '(?:[^']|'')*')?$"),
    re.compile(r"^SELECT (?:MAX|MIN|AVG|SUM)\((?P<column>\w+)\) "
               r"FROM (?P<table>\w+)$"),
    re.compile(r"^SELECT (?P<column>\w+) FROM (?P<table>\w+)"
               r"(?: WHERE (?P<where>\w+) = '(?:[^']|'')*')?$"),
]


def _validate_sql(sql: SqlQuery, schema: DomainSchema) -> None:
    for pattern in _SQL_PATTERNS:
        match = pattern.match(sql.text)
        if match is None:
            continue
        parts = match.groupdict()
        table = schema.table(parts["table"])
        if table is None:
            raise ExecutionError(
                f"unknown table {parts['table']!r} in query: {sql.text!r}")
        for key in ("column", "where"):
            ident = parts.get(key)
            if ident is not None and table.column(ident) is None:
                raise ExecutionError(
                    f"unknown column {ident!r} of table {table.name!r}")
        return
    raise ExecutionError(f"query outside the emitted SQL subset: {sql.text!r}")


def execute(sql: SqlQuery, store: SqlStore) -> ExecResult:
    """Run an emitted query against the store.

    Rows come back ordered by first column ascending (nulls first);
    an aggregate over an empty table yields a null flagged result.
    """
    _validate_sql(sql, store.schema)
    columns, rows = store.run(sql.text)
    rows.sort(key=lambda r: (r[0] is not None, r[0]))
    empty_aggregate = (sql.shape == "aggregate" and len(rows) == 1
                       and rows[0][0] is None)
    return ExecResult(columns=tuple(columns), rows=tuple(rows),
                      empty_aggregate=empty_aggregate)


def render_result(result: ExecResult) -> str:
    """Human-readable rendering of a result table for the chat reply."""
    if result.empty_aggregate:
        return "no data (empty table)"
    if len(result.rows) == 1 and len(result.rows[0]) == 1:
        return str(result.rows[0][0])
    lines = [" | ".join(result.columns)]
    for row in result.rows:
        lines.append(" | ".join("" if v is None else str(v) for v in row))
    return "\n".join(lines)
