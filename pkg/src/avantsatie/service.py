"""Session host: HTTP endpoints to create sessions and post inputs, a
WebSocket frame stream per session, JSONL session logs.

Each session owns one tick thread; HTTP/WS handlers only enqueue inputs or
read snapshots under the session lock. Frame fan-out is non-blocking: a
slow subscriber loses oldest frames, never the tick loop.
"""

from __future__ import annotations

import asyncio
import os
import threading
import time
import uuid
from collections import deque
from contextlib import asynccontextmanager

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import LoadError, UnknownSessionError
from .session import (
    SessionConfig,
    SessionEngine,
    input_from_dict,
    resolve_config,
)

_CLOSE = object()


class Subscriber:
    """Bounded frame queue; oldest messages drop when the consumer lags."""

    def __init__(self, maxlen: int = 256):
        self._items: deque = deque(maxlen=maxlen)
        self._cond = threading.Condition()
        self._closed = False

    def put(self, item) -> None:
        with self._cond:
            self._items.append(item)
            self._cond.notify()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def get(self, timeout: float = 1.0):
        """Next message, _CLOSE at end of stream, None on timeout."""
        with self._cond:
            if not self._items and not self._closed:
                self._cond.wait(timeout)
            if self._items:
                return self._items.popleft()
            return _CLOSE if self._closed else None

    def __len__(self) -> int:
        with self._cond:
            return len(self._items)


class LiveSession:
    """One running session: engine + drift-corrected tick thread + fan-out."""

    def __init__(self, session_id: str, config: SessionConfig, log_dir: str | None):
        self.id = session_id
        self.config = config
        self._log_file = None
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
            self._log_file = open(os.path.join(log_dir, f"{session_id}.jsonl"), "w")
        resolved = resolve_config(config)
        self._lock = threading.Lock()
        self.engine = SessionEngine(resolved, log_stream=self._log_file)
        self._subscribers: list[Subscriber] = []
        self._stop = threading.Event()
        self.closed = False
        self._last_snapshot = None
        self._thread = threading.Thread(target=self._run, name=f"session-{session_id}", daemon=True)
        self._thread.start()

    def _run(self) -> None:
        period = self.engine.dt
        next_t = time.monotonic()
        while not self._stop.is_set():
            with self._lock:
                frame, _events = self.engine.tick()
                done = self.engine.done
            message = frame.to_dict()
            with self._lock:
                subscribers = list(self._subscribers)
            for sub in subscribers:
                sub.put(message)
                for event in message["events"]:
                    sub.put({"type": "event", "tick": message["tick"], "t": message["t"], "event": event})
            if done:
                break
            next_t += period
            delay = next_t - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_t = time.monotonic()
        with self._lock:
            self._last_snapshot = self.engine.snapshot()
            self.closed = True
            if self._log_file is not None:
                self._log_file.close()
                self._log_file = None
            for sub in self._subscribers:
                sub.close()
            self._subscribers.clear()

    def submit(self, inp) -> int:
        with self._lock:
            if self.closed:
                return self.engine.tick_index
            self.engine.submit(inp)
            return self.engine.tick_index

    def snapshot(self) -> dict:
        with self._lock:
            if self._last_snapshot is not None:
                return self._last_snapshot
            return self.engine.snapshot()

    def subscribe(self) -> Subscriber:
        sub = Subscriber()
        with self._lock:
            if self.closed:
                sub.put(self.engine.snapshot())
                sub.close()
                return sub
            sub.put(self.engine.snapshot())
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: Subscriber) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)
        sub.close()

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5.0)


class SessionManager:
    def __init__(self, log_dir: str | None = None):
        self.log_dir = log_dir
        self._sessions: dict[str, LiveSession] = {}
        self._lock = threading.Lock()

    def create(self, config: SessionConfig) -> str:
        session_id = uuid.uuid4().hex[:12]
        session = LiveSession(session_id, config, self.log_dir)
        with self._lock:
            self._sessions[session_id] = session
        return session_id

    def get(self, session_id: str) -> LiveSession:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSessionError(session_id) from None

    def remove(self, session_id: str) -> None:
        session = self.get(session_id)
        session.stop()
        with self._lock:
            self._sessions.pop(session_id, None)

    def shutdown(self) -> None:
        with self._lock:
            sessions = list(self._sessions.values())
            self._sessions.clear()
        for session in sessions:
            session.stop()


def create_app(manager: SessionManager | None = None, static_dir: str | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        app.state.manager.shutdown()

    app = FastAPI(title="avantsatie session host", lifespan=lifespan)
    app.state.manager = manager or SessionManager()

    @app.post("/sessions")
    def create_session(body: dict):
        try:
            config = SessionConfig.from_dict(body or {})
            session_id = app.state.manager.create(config)
        except LoadError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/input")
    def post_input(session_id: str, body: dict):
        try:
            session = app.state.manager.get(session_id)
            inp = input_from_dict(body or {})
        except UnknownSessionError:
            return JSONResponse({"error": f"unknown session {session_id}"}, status_code=404)
        except LoadError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        tick = session.submit(inp)
        return {"ok": True, "applied_at_tick": tick}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        try:
            session = app.state.manager.get(session_id)
        except UnknownSessionError:
            return JSONResponse({"error": f"unknown session {session_id}"}, status_code=404)
        return session.snapshot()

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        try:
            app.state.manager.remove(session_id)
        except UnknownSessionError:
            return JSONResponse({"error": f"unknown session {session_id}"}, status_code=404)
        return {"ok": True}

    @app.websocket("/sessions/{session_id}/frames")
    async def frames(websocket: WebSocket, session_id: str):
        try:
            session = app.state.manager.get(session_id)
        except UnknownSessionError:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        sub = session.subscribe()
        try:
            while True:
                item = await asyncio.to_thread(sub.get, 1.0)
                if item is _CLOSE:
                    break
                if item is None:
                    continue
                await websocket.send_json(item)
        except WebSocketDisconnect:
            pass
        finally:
            session.unsubscribe(sub)
            try:
                await websocket.close()
            except RuntimeError:
                pass

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve(host: str, port: int, log_dir: str | None = None, static_dir: str | None = None) -> None:
    import uvicorn

    app = create_app(SessionManager(log_dir=log_dir), static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
