"""HTTP+JSON surface over the session manager.

Endpoints (see README for the exact payload schemas):

* ``POST /sessions`` -- create; body {task, strategy?, pause_policy?}
* ``GET /sessions/{id}`` -- snapshot with branch tree
* ``GET /sessions/{id}/events?from=k&branch=b&wait=s`` -- incremental
  long-poll step stream, resumable from any index
* ``POST /sessions/{id}/pause`` / ``/resume``
* ``POST /sessions/{id}/edit`` -- body {step_index, text}; text "" deletes

Status codes: 404 unknown session, 409 for pause/resume/edit conflicts
(NotPaused), 422 for malformed edits (not a thought, index out of range),
400 for a bad task. When ``THOUGHTLOOP_SESSION_TOKEN`` is set every request
must carry ``Authorization: Bearer <token>``.

The UI under ``frontend/`` is served from ``/ui`` when its build output is
present.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .sessions import (
    BadTask,
    EditCommand,
    IndexOutOfRange,
    NotAThought,
    NotPaused,
    SessionManager,
    UnknownSession,
)
from .trajectory import DOMAINS, TaskSpec

ENV_TOKEN = "THOUGHTLOOP_SESSION_TOKEN"


class TaskBody(BaseModel):
    domain: str
    instruction: str
    gold: str | None = None
    step_limit: int = Field(default=7, ge=1)


class CreateBody(BaseModel):
    task: TaskBody
    strategy: str = "react"
    pause_policy: str = "manual"


class EditBody(BaseModel):
    step_index: int
    text: str = ""


def create_app(manager: SessionManager, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="thoughtloop session service")

    def auth(request: Request) -> None:
        token = os.environ.get(ENV_TOKEN, "")
        if not token:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or wrong bearer token")

    def session_for(session_id: str):
        try:
            return manager.get(session_id)
        except UnknownSession:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.post("/sessions", dependencies=[Depends(auth)])
    def create_session(body: CreateBody):
        if body.task.domain not in DOMAINS:
            raise HTTPException(status_code=400, detail=f"unknown domain {body.task.domain!r}")
        try:
            task = TaskSpec(
                domain=body.task.domain,
                instruction=body.task.instruction,
                gold=body.task.gold,
                step_limit=body.task.step_limit,
            )
            session = manager.create(task, strategy=body.strategy, pause_policy=body.pause_policy)
        except (BadTask, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"id": session.id, "state": session.state}

    @app.get("/sessions/{session_id}", dependencies=[Depends(auth)])
    def get_session(session_id: str):
        return session_for(session_id).snapshot()

    @app.get("/sessions/{session_id}/events", dependencies=[Depends(auth)])
    def get_events(
        session_id: str,
        start: int = Query(0, alias="from", ge=0),
        branch: int | None = None,
        wait: float = 0.0,
    ):
        session = session_for(session_id)
        try:
            return session.events(start=start, branch=branch, wait=min(wait, 25.0))
        except IndexOutOfRange as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/sessions/{session_id}/pause", dependencies=[Depends(auth)])
    def pause_session(session_id: str):
        session = session_for(session_id)
        try:
            state = session.pause()
        except NotPaused as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"id": session.id, "state": state}

    @app.post("/sessions/{session_id}/resume", dependencies=[Depends(auth)])
    def resume_session(session_id: str):
        session = session_for(session_id)
        try:
            state = session.resume()
        except NotPaused as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"id": session.id, "state": state}

    @app.post("/sessions/{session_id}/edit", dependencies=[Depends(auth)])
    def edit_session(session_id: str, body: EditBody):
        session = session_for(session_id)
        try:
            branch = session.edit(EditCommand(step_index=body.step_index, text=body.text))
        except NotPaused as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (NotAThought, IndexOutOfRange) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"id": session.id, "state": session.state, "branch": branch}

    @app.get("/healthz")
    def health():
        return {"ok": True, "sessions": len(manager.ids())}

    ui = Path(ui_dir) if ui_dir is not None else None
    if ui is not None and ui.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui), html=True), name="ui")

    return app
