"""Network transports for the chat service.

Two surfaces expose the same operations:

- a persistent bidirectional line protocol over TCP, one JSON object
  per line (ops: open-session, send-message, fetch-history, wiki-get,
  wiki-list, health), and
- an HTTP mirror of the same operations for request/response clients
  such as the browser chat UI.

Message handling runs in a thread pool so concurrent sessions proceed
in parallel while each session keeps strict arrival order.
"""

from __future__ import annotations

import asyncio
import json
import logging
from typing import Any

from pydantic import BaseModel

from .controller import ChatService, ControllerError, UnknownSessionError
from .datalake import NotFoundError

logger = logging.getLogger(__name__)


def handle_request(service: ChatService, frame: dict[str, Any],
                   ) -> dict[str, Any]:
    """Dispatch one protocol frame; never raises, errors become frames."""
    op = frame.get("op")
    try:
        if op == "open-session":
            session_id = service.open_session(frame.get("locale", "en"))
            return {"ok": True, "session_id": session_id}
        if op == "send-message":
            user_msg, bot = service.post_message(
                session_id=frame["session_id"],
                body=frame.get("body", ""),
                message_id=frame.get("message_id"),
                message_type=frame.get("type", "text"),
                quoted_message_id=frame.get("quoted_message_id"))
            return {"ok": True, "user_message": user_msg.to_wire(),
                    "bot_message": bot.to_wire()}
        if op == "fetch-history":
            history = service.fetch_history(frame["session_id"])
            return {"ok": True,
                    "messages": [m.to_wire() for m in history]}
        if op == "wiki-get":
            entry = service.get_wiki(frame["slug"])
            return {"ok": True, "entry": entry.to_dict()}
        if op == "wiki-list":
            entries = service.list_wiki(frame.get("axis"))
            return {"ok": True,
                    "entries": [e.to_dict() for e in entries]}
        if op == "health":
            return {"ok": True, **service.health()}
        return {"ok": False, "error": f"unknown op {op!r}"}
    except (NotFoundError, UnknownSessionError) as exc:
        return {"ok": False, "error": str(exc), "error_kind": "not-found"}
    except (ControllerError, KeyError) as exc:
        return {"ok": False, "error": str(exc) or repr(exc),
                "error_kind": "bad-request"}


async def serve_line_protocol(service: ChatService, host: str, port: int,
                              ) -> asyncio.AbstractServer:
    """Start the TCP JSON-lines server; returns the asyncio server."""

    async def handle_connection(reader: asyncio.StreamReader,
                                writer: asyncio.StreamWriter) -> None:
        loop = asyncio.get_running_loop()
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                try:
                    frame = json.loads(line)
                except json.JSONDecodeError as exc:
                    response = {"ok": False, "error": f"bad frame: {exc.msg}"}
                else:
                    response = await loop.run_in_executor(
                        None, handle_request, service, frame)
                writer.write(json.dumps(response, ensure_ascii=False)
                             .encode("utf-8") + b"\n")
                await writer.drain()
        except ConnectionResetError:
            pass
        finally:
            writer.close()

    server = await asyncio.start_server(handle_connection, host, port)
    logger.info("line protocol listening on %s:%d", host, port)
    return server


class OpenSessionBody(BaseModel):
    locale: str = "en"


class SendMessageBody(BaseModel):
    body: str = ""
    message_id: str | None = None
    type: str = "text"
    quoted_message_id: str | None = None


def build_http_app(service: ChatService):
    """FastAPI mirror of the protocol operations (for browser clients)."""
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware

    app = FastAPI(title="maris chat service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    def _raise_for(frame: dict[str, Any]) -> dict[str, Any]:
        if not frame.get("ok"):
            status = 404 if frame.get("error_kind") == "not-found" else 400
            raise HTTPException(status_code=status, detail=frame["error"])
        return frame

    @app.post("/sessions")
    def open_session(body: OpenSessionBody):
        return _raise_for(handle_request(
            service, {"op": "open-session", "locale": body.locale}))

    @app.post("/sessions/{session_id}/messages")
    def send_message(session_id: str, body: SendMessageBody):
        return _raise_for(handle_request(service, {
            "op": "send-message", "session_id": session_id,
            "body": body.body, "message_id": body.message_id,
            "type": body.type,
            "quoted_message_id": body.quoted_message_id}))

    @app.get("/sessions/{session_id}/history")
    def fetch_history(session_id: str):
        return _raise_for(handle_request(
            service, {"op": "fetch-history", "session_id": session_id}))

    @app.get("/wiki/{slug}")
    def wiki_get(slug: str):
        return _raise_for(handle_request(
            service, {"op": "wiki-get", "slug": slug}))

    @app.get("/wiki")
    def wiki_list(axis: str | None = None):
        return _raise_for(handle_request(
            service, {"op": "wiki-list", "axis": axis}))

    @app.get("/health")
    def health():
        return _raise_for(handle_request(service, {"op": "health"}))

    return app


async def run_servers(service: ChatService, host: str, http_port: int,
                      line_port: int) -> None:
    """Run both transports until cancelled."""
    import uvicorn

    line_server = await serve_line_protocol(service, host, line_port)
    config = uvicorn.Config(build_http_app(service), host=host,
                            port=http_port, log_level="info")
    http_server = uvicorn.Server(config)
    try:
        await http_server.serve()
    finally:
        line_server.close()
        await line_server.wait_closed()
