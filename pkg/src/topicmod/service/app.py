"""FastAPI application: scoring, review queue, decisions, and stats.

The service wraps exactly one classifier variant and one ETM checkpoint;
it adds no model logic of its own.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Response

from .. import classifier as clf
from .. import etm as etm_mod
from ..corpus import Comment
from .schemas import (
    CommentIn,
    DecisionRecordOut,
    DecisionRequest,
    EnqueueRequest,
    EnqueueResponse,
    QueueItemOut,
    QueuePage,
    ScoreRequest,
    ScoreResponse,
    StatsResponse,
    TopTopic,
)
from .store import (
    AlreadyDecidedError,
    DuplicateIdError,
    ModerationStore,
    QueueItem,
    UnknownIdError,
)


class ModelBundle:
    """One loaded classifier + ETM pair serving all predictions."""

    def __init__(self, model: clf.ClassifierModel, etm: etm_mod.ETMModel):
        self.model = model
        self.etm = etm

    @classmethod
    def load(cls, model_dir: str | Path, etm_dir: str | Path) -> "ModelBundle":
        return cls(clf.load_checkpoint(model_dir), etm_mod.load_checkpoint(etm_dir))

    def predict(self, comment: Comment) -> clf.ScoredComment:
        return clf.predict(self.model, comment, self.etm)


def _scored_to_response(scored: clf.ScoredComment) -> ScoreResponse:
    return ScoreResponse(
        comment_id=scored.comment_id,
        probability=scored.probability,
        predicted_label=scored.predicted_label,
        theta=[float(x) for x in scored.theta],
        top_topics=[TopTopic(topic_id=k, weight=w, words=list(words))
                    for k, w, words in scored.top_topics],
        all_oov=scored.all_oov,
    )


def _item_out(item: QueueItem) -> QueueItemOut:
    return QueueItemOut(
        comment=CommentIn(**item.comment),
        probability=item.probability,
        predicted_label=item.predicted_label,
        top_topics=[TopTopic(**t) for t in item.top_topics],
        status=item.status,
        decided_by=item.decided_by,
        decided_at=item.decided_at,
        enqueued_at=item.enqueued_at,
    )


def create_app(bundle: Optional[ModelBundle],
               store: Optional[ModerationStore] = None) -> FastAPI:
    app = FastAPI(title="topicmod moderation service")
    store = store if store is not None else ModerationStore()
    app.state.bundle = bundle
    app.state.store = store

    def require_bundle() -> ModelBundle:
        if app.state.bundle is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return app.state.bundle

    @app.post("/score", response_model=ScoreResponse)
    def score(request: ScoreRequest):
        bundle = require_bundle()
        comment = Comment(id="adhoc", text=request.text, label=0,
                          section=request.section or "")
        return _scored_to_response(bundle.predict(comment))

    @app.post("/queue", response_model=EnqueueResponse)
    def enqueue(request: EnqueueRequest):
        bundle = require_bundle()
        items = []
        for payload in request.comments:
            comment = Comment(id=payload.id, text=payload.text, label=0,
                              section=payload.section,
                              subsection=payload.subsection,
                              article_id=payload.article_id,
                              timestamp=payload.timestamp)
            scored = bundle.predict(comment)
            items.append(QueueItem(
                comment=payload.model_dump(),
                probability=scored.probability,
                predicted_label=scored.predicted_label,
                theta=[float(x) for x in scored.theta],
                top_topics=[{"topic_id": k, "weight": w, "words": list(words)}
                            for k, w, words in scored.top_topics],
                all_oov=scored.all_oov,
            ))
        try:
            count = store.enqueue(items)
        except DuplicateIdError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return EnqueueResponse(count=count)

    @app.get("/queue", response_model=QueuePage)
    def queue(response: Response,
              status: Optional[str] = Query(default=None),
              section: Optional[str] = Query(default=None),
              order: str = Query(default="confidence_desc"),
              offset: int = Query(default=0, ge=0),
              limit: int = Query(default=50, ge=1)):
        if status is None:
            # default view is the pending queue, confidence first
            status = "pending" if order == "confidence_desc" else None
        try:
            items, total = store.list_items(status=status, section=section,
                                            order=order, offset=offset,
                                            limit=limit)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        response.headers["X-Total-Count"] = str(total)
        return QueuePage(items=[_item_out(it) for it in items],
                         total=total, offset=offset)

    @app.post("/queue/{comment_id}/decision", response_model=DecisionRecordOut)
    def decide(comment_id: str, request: DecisionRequest):
        try:
            record = store.decide(comment_id, request.decision,
                                  request.moderator_id)
        except UnknownIdError as exc:
            raise HTTPException(status_code=404,
                                detail=f"unknown comment id {comment_id!r}") from exc
        except AlreadyDecidedError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return DecisionRecordOut(**record.to_dict())

    @app.get("/stats", response_model=StatsResponse)
    def stats():
        return StatsResponse(**store.stats())

    return app


def load_service_config(path: Optional[str | Path] = None) -> dict:
    """Service settings from a JSON file with env-var overrides."""
    config = {"model_dir": None, "etm_dir": None, "port": 8000,
              "store_path": None}
    if path is not None:
        config.update(json.loads(Path(path).read_text()))
    for key, env in [("model_dir", "TOPICMOD_MODEL_DIR"),
                     ("etm_dir", "TOPICMOD_ETM_DIR"),
                     ("port", "TOPICMOD_PORT"),
                     ("store_path", "TOPICMOD_STORE_PATH")]:
        if os.environ.get(env):
            config[key] = os.environ[env]
    config["port"] = int(config["port"])
    return config


def create_app_from_config(config: dict) -> FastAPI:
    bundle = None
    if config.get("model_dir") and config.get("etm_dir"):
        bundle = ModelBundle.load(config["model_dir"], config["etm_dir"])
    store = ModerationStore(log_path=config.get("store_path"))
    if config.get("store_path") and Path(config["store_path"]).exists():
        replayed = ModerationStore.replay(config["store_path"])
        replayed._log_path = Path(config["store_path"])
        store = replayed
    return create_app(bundle, store)
