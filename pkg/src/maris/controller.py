"""Chat service hub: sessions, message routing, wiki serving, health.

Messages are routed by the question classifier: database-type questions
go through the NL2SQL translator and executor (with the result table
rendered to text), everything else through retrieve-then-read QA. The
dialog model is a minimal router with no multi-turn state beyond
message quoting; sessions are in-memory and independent, and messages
within a session are processed strictly in arrival order under the
session lock.
"""

from __future__ import annotations

import itertools
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

from .config import AppConfig
from .datalake import DataLake, NotFoundError, SourceRef, WikiEntry
from .nl2sql import (DomainSchema, Grammar, SqlStore, TranslationError,
                     classify_question, execute, render_result, translate)
from .qa import answer_question
from .retriever import InvertedIndex

MESSAGE_TYPES = ("text", "attachment-ref", "voice-ref")
SENDERS = ("user", "bot")


class ControllerError(Exception):
    pass


class UnsupportedLocaleError(ControllerError):
    pass


class UnknownSessionError(ControllerError):
    pass


class InvalidMessageError(ControllerError):
    pass


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class ChatMessage:
    """Wire-protocol envelope; one frame per message.

    Bot messages answering from the corpus carry the source references
    of the documents (or the relational store) behind the answer.
    """

    session_id: str
    message_id: str
    timestamp: str
    type: str
    body: str
    sender: str
    quoted_message_id: str | None = None
    sources: tuple[SourceRef, ...] = ()

    def to_wire(self) -> dict[str, Any]:
        frame: dict[str, Any] = {
            "session_id": self.session_id, "message_id": self.message_id,
            "timestamp": self.timestamp, "type": self.type,
            "body": self.body, "sender": self.sender,
            "quoted_message_id": self.quoted_message_id,
            "sources": [s.to_dict() for s in self.sources],
        }
        return frame


@dataclass
class Session:
    session_id: str
    created_at: str
    locale: str
    history: list[ChatMessage] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    _counter: "itertools.count[int]" = field(
        default_factory=lambda: itertools.count(1))

    def next_message_id(self, prefix: str) -> str:
        return f"{prefix}{next(self._counter)}"


class ChatService:
    """Service facade wiring the lake, retriever, QA, and NL2SQL together.

    The index, schema, and store are read-only snapshots; `reload`
    swaps them atomically so in-flight requests keep a consistent view.
    """

    def __init__(self, lake: DataLake, index: InvertedIndex | None,
                 schema: DomainSchema | None = None,
                 store: SqlStore | None = None,
                 grammar: Grammar | None = None,
                 config: AppConfig | None = None):
        self.lake = lake
        self._snapshot = (index, schema, store, grammar)
        self.config = config or AppConfig()
        self._sessions: dict[str, Session] = {}
        self._sessions_lock = threading.Lock()

    def reload(self, index: InvertedIndex | None = None,
               schema: DomainSchema | None = None,
               store: SqlStore | None = None,
               grammar: Grammar | None = None) -> None:
        old = self._snapshot
        self._snapshot = (index or old[0], schema or old[1],
                          store or old[2], grammar or old[3])

    # -- sessions ----------------------------------------------------------

    def open_session(self, locale: str) -> str:
        if locale not in self.config.locales:
            raise UnsupportedLocaleError(
                f"locale {locale!r} not supported; supported: "
                f"{', '.join(self.config.locales)}")
        session = Session(session_id=uuid.uuid4().hex,
                          created_at=_now_iso(), locale=locale)
        with self._sessions_lock:
            self._sessions[session.session_id] = session
        return session.session_id

    def _session(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        return session

    def fetch_history(self, session_id: str) -> list[ChatMessage]:
        session = self._session(session_id)
        with session.lock:
            return list(session.history)

    # -- message handling --------------------------------------------------

    def post_message(self, session_id: str, body: str,
                     message_id: str | None = None,
                     message_type: str = "text",
                     quoted_message_id: str | None = None,
                     timestamp: str | None = None,
                     ) -> tuple[ChatMessage, ChatMessage]:
        """Append the user message and the bot reply; return both.

        Non-text message types get a polite unsupported-type reply
        rather than an error; a quoted id must reference an earlier
        message in the same session. The whole exchange happens under
        the session lock, so replies keep user-message arrival order.
        """
        if message_type not in MESSAGE_TYPES:
            raise InvalidMessageError(f"unknown message type {message_type!r}")
        session = self._session(session_id)
        with session.lock:
            known_ids = {m.message_id for m in session.history}
            if quoted_message_id is not None \
                    and quoted_message_id not in known_ids:
                raise InvalidMessageError(
                    f"quoted_message_id {quoted_message_id!r} does not "
                    f"reference an earlier message in this session")
            if message_id is None:
                message_id = session.next_message_id("u")
            elif message_id in known_ids:
                raise InvalidMessageError(
                    f"message_id {message_id!r} already used in session")
            user_msg = ChatMessage(
                session_id=session_id, message_id=message_id,
                timestamp=timestamp or _now_iso(), type=message_type,
                body=body, sender="user",
                quoted_message_id=quoted_message_id)
            session.history.append(user_msg)
            bot = self._reply(session, user_msg)
            session.history.append(bot)
            return user_msg, bot

    def handle_message(self, session_id: str, body: str,
                       message_id: str | None = None,
                       message_type: str = "text",
                       quoted_message_id: str | None = None,
                       timestamp: str | None = None) -> ChatMessage:
        """post_message, returning only the bot reply."""
        _, bot = self.post_message(session_id, body, message_id,
                                   message_type, quoted_message_id, timestamp)
        return bot

    def _reply(self, session: Session, user_msg: ChatMessage) -> ChatMessage:
        locale = session.locale
        if user_msg.type != "text":
            body, sources = self.config.unsupported_type_message(locale), ()
        else:
            body, sources = self._answer_text(user_msg.body, locale)
        return ChatMessage(
            session_id=session.session_id,
            message_id=session.next_message_id("b"),
            timestamp=_now_iso(), type="text", body=body, sender="bot",
            quoted_message_id=user_msg.quoted_message_id,
            sources=tuple(sources))

    def _answer_text(self, question: str,
                     locale: str) -> tuple[str, tuple[SourceRef, ...]]:
        index, schema, store, grammar = self._snapshot
        if schema is not None and store is not None and \
                classify_question(question, schema,
                                  self.config.sql_cues) == "sql-type":
            try:
                query = translate(question, schema, store, grammar,
                                  self.config.where_prepositions)
                result = execute(query, store)
                source = SourceRef(origin_name="domain database",
                                   origin_url_or_citation=query.text)
                return render_result(result), (source,)
            except TranslationError:
                pass  # fall back to open QA
        if index is None:
            return self.config.refusal_message(locale), ()
        answer = answer_question(
            question, index, self.lake, k=self.config.retriever.k,
            cfg=self.config.qa, refusal=self.config.refusal_message(locale))
        return answer.text, answer.sources

    # -- wiki --------------------------------------------------------------

    def get_wiki(self, slug: str) -> WikiEntry:
        return self.lake.get_wiki(slug)

    def list_wiki(self, axis: str | None = None) -> list[WikiEntry]:
        return self.lake.list_wiki(axis)

    # -- health ------------------------------------------------------------

    def health(self) -> dict[str, Any]:
        index, schema, store, _ = self._snapshot
        modules = {
            "datalake": {"ready": True,
                         "documents": self.lake.document_count(),
                         "wiki_entries": len(self.lake.list_wiki())},
            "retriever": {"index_built": index is not None,
                          "indexed_documents":
                              index.doc_count if index else 0},
            "nl2sql": {"store_loaded": store is not None,
                       "tables": [t.name for t in schema.tables]
                       if schema else []},
            "sessions": {"open": len(self._sessions)},
        }
        ready = modules["retriever"]["index_built"]
        return {"status": "ok" if ready else "degraded", "modules": modules}


def message_from_wire(frame: dict[str, Any]) -> ChatMessage:
    """Rebuild a ChatMessage from its wire representation."""
    return ChatMessage(
        session_id=str(frame["session_id"]),
        message_id=str(frame["message_id"]),
        timestamp=str(frame.get("timestamp", "")),
        type=str(frame.get("type", "text")),
        body=str(frame.get("body", "")),
        sender=str(frame.get("sender", "user")),
        quoted_message_id=frame.get("quoted_message_id"),
        sources=tuple(SourceRef.from_dict(s)
                      for s in frame.get("sources", ())),
    )
