"""HTTP annotation service: exposes one live session to human annotators.

One process serves one session directory (the exclusive-writer contract stays
trivial). Labels are durable in the session log before the 2xx acknowledgment
leaves; retraining runs on a background thread while /api/next answers 503
with a Retry-After hint.
"""
from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import metrics
from .engine import (
    FINISHED,
    TRAINING,
    ActiveSession,
    AnnotationConflict,
    AnnotationTask,
    SessionError,
)
from .labels import parse_label

log = logging.getLogger(__name__)

RETRY_AFTER_SECONDS = 2


class LabelSubmission(BaseModel):
    word: str
    label: Literal["mental", "physical"]
    note: str | None = None
    annotator: str | None = None


class _BackgroundTrainer:
    """Runs pending retraining off the request path, one thread at a time."""

    def __init__(self, session: ActiveSession):
        self.session = session
        self.last_error: str | None = None
        self._thread: threading.Thread | None = None
        self._guard = threading.Lock()

    def kick(self) -> None:
        with self._guard:
            if self._thread is not None and self._thread.is_alive():
                return
            if self.session.status != TRAINING:
                return
            self._thread = threading.Thread(target=self._run, daemon=True)
            self._thread.start()

    def _run(self) -> None:
        try:
            rows = self.session.train_pending_iteration()
            self.last_error = None
            for row in rows:
                log.info("retrained iteration %d (dev accuracy %.3f)", row.iteration, row.dev_accuracy)
        except Exception as exc:  # surfaced via /api/session, never crashes the server
            self.last_error = str(exc)
            log.exception("background retraining failed")


def _task_payload(task: AnnotationTask) -> dict:
    return {
        "word": task.word,
        "glosses": list(task.glosses),
        "iteration": task.iteration,
        "strategy": task.strategy,
        "session_id": task.session_id,
        "progress": {
            "pos_filled": task.pos_filled,
            "pos_quota": task.pos_quota,
            "neg_filled": task.neg_filled,
            "neg_quota": task.neg_quota,
            "annotated": task.annotated,
            "cap": task.cap,
        },
    }


def create_app(
    session: ActiveSession,
    ui_dir: str | Path | None = None,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    app = FastAPI(title="lexloop annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    trainer = _BackgroundTrainer(session)
    app.state.session = session
    app.state.trainer = trainer
    # a session resumed with an iteration closed but untrained picks up here
    trainer.kick()

    def _reject_by_status(response_for: str) -> None:
        status = session.status
        if status == TRAINING:
            raise HTTPException(
                status_code=503,
                detail=f"retraining in progress; retry {response_for} shortly",
                headers={"Retry-After": str(RETRY_AFTER_SECONDS)},
            )
        if status == FINISHED:
            raise HTTPException(status_code=404, detail="session is finished")

    @app.get("/api/session")
    def session_info() -> dict:
        state = session.state
        return {
            "session_id": session.session_id,
            "status": session.status,
            "strategy": session.cfg.strategy.name,
            "seed": session.cfg.seed,
            "iteration": state.iteration,
            "iterations": session.cfg.iterations,
            "progress": session.progress(),
            "pool_initial": session.initial_pool_size,
            "pool_remaining": len(state.unlabeled),
            "labeled_total": len(state.labeled),
            "training_error": trainer.last_error,
        }

    @app.get("/api/next")
    def next_task() -> dict:
        _reject_by_status("/api/next")
        try:
            task = session.current_task()
        except SessionError:
            # status flipped between the check and the pick
            _reject_by_status("/api/next")
            raise
        return _task_payload(task)

    @app.post("/api/label")
    def submit_label(body: LabelSubmission) -> dict:
        _reject_by_status("/api/label")
        try:
            result = session.submit(
                body.word,
                parse_label(body.label),
                note=body.note,
                annotator=body.annotator,
            )
        except AnnotationConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except SessionError as exc:
            _reject_by_status("/api/label")
            raise HTTPException(status_code=409, detail=str(exc)) from None
        if result.iteration_complete:
            trainer.kick()
        return {
            "word": result.word,
            "counted": result.counted,
            "iteration_complete": result.iteration_complete,
            "status": session.status,
        }

    @app.get("/api/metrics")
    def metrics_history() -> dict:
        return metrics.session_report_to_dict(session.report())

    @app.get("/api/export")
    def export_rows() -> dict:
        rows = session.export_rows()
        return {"rows": rows, "count": len(rows)}

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
