"""Live chat: the human takes the speaker side, so the empathy valence is
computed over their messages (last detected valence minus the first).

The HTTP layer keeps sessions in memory behind per-session locks, expires
them after an idle timeout, and never mutates model parameters.  Error
bodies are always {code, message}.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .corpus import tokenize
from .detector import detect
from .pipeline import ChatComponents
from .predictor import predict_next
from .retrieval import retrieve

DEFAULT_IDLE_TIMEOUT_S = 30.0 * 60.0
HISTORY_LEN = 4


@dataclass
class ChatState:
    history: list[str] = field(default_factory=list)
    valence_trace: list[float] = field(default_factory=list)
    turns: list[dict] = field(default_factory=list)


class ChatEngine:
    """One listener turn: detect the user's emotion, pick the next emotion,
    retrieve a reply under the emotion filter, extend the valence trace."""

    def __init__(self, components: ChatComponents, history_len: int = HISTORY_LEN):
        self.components = components
        self.history_len = history_len

    def turn(self, state: ChatState, user_text: str) -> dict:
        if not tokenize(user_text):
            raise ValueError("message must contain at least one token")
        c = self.components
        out = detect(c.detector, user_text)
        e_next, _ = predict_next(c.predictor, user_text, out.dominant, mode="argmax")
        state.history.append(user_text)
        query = " ".join(state.history[-self.history_len :])
        result = retrieve(c.encoder, c.listener_pool, query, e_next=e_next, k=1)
        reply = c.listener_pool.entries[result.indices[0]].text
        state.history.append(reply)
        state.valence_trace.append(out.va.valence)
        payload = {
            "user_text": user_text,
            "reply_text": reply,
            "detected_emotion": out.dominant.name,
            "detected_valence": out.va.valence,
            "detected_arousal": out.va.arousal,
            "predicted_next_emotion": e_next.name,
            "empathy_valence_so_far": state.valence_trace[-1] - state.valence_trace[0],
            "turn_index": len(state.turns),
        }
        state.turns.append(payload)
        return payload


@dataclass
class _Session:
    state: ChatState
    last_active: float
    lock: threading.Lock = field(default_factory=threading.Lock)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(
    components: ChatComponents,
    idle_timeout_s: float = DEFAULT_IDLE_TIMEOUT_S,
    clock=time.monotonic,
) -> FastAPI:
    app = FastAPI(title="cheerbot chat service")
    # the browser client is typically served from a separate static origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    engine = ChatEngine(components)
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    def purge_expired() -> None:
        now = clock()
        with registry_lock:
            expired = [
                sid for sid, s in sessions.items() if now - s.last_active > idle_timeout_s
            ]
            for sid in expired:
                del sessions[sid]

    def get_session(session_id: str) -> _Session | None:
        purge_expired()
        with registry_lock:
            return sessions.get(session_id)

    @app.post("/api/session")
    async def new_session():
        purge_expired()
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = _Session(state=ChatState(), last_active=clock())
        return JSONResponse(content={"session_id": session_id})

    @app.post("/api/session/{session_id}/message")
    async def post_message(session_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return _error(404, "session_not_found", f"no session {session_id!r}")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON with a 'text' field")
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            return _error(400, "bad_request", "body must be JSON with a 'text' field")
        text = body["text"]
        if not tokenize(text):
            return _error(400, "empty_message", "message must contain at least one token")
        with session.lock:
            session.last_active = clock()
            payload = engine.turn(session.state, text)
        return JSONResponse(content=payload)

    @app.get("/api/session/{session_id}/trace")
    async def get_trace(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "session_not_found", f"no session {session_id!r}")
        with session.lock:
            session.last_active = clock()
            content = {
                "valence_trace": list(session.state.valence_trace),
                "turns": list(session.state.turns),
            }
        return JSONResponse(content=content)

    return app
