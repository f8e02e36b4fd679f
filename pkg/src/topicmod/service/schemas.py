"""Request/response models for the moderation service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, field_validator


class ScoreRequest(BaseModel):
    text: str
    section: Optional[str] = None

    @field_validator("text")
    @classmethod
    def text_not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("text must be non-empty")
        return v


class TopTopic(BaseModel):
    topic_id: int
    weight: float
    words: list[str]


class ScoreResponse(BaseModel):
    comment_id: str
    probability: float
    predicted_label: int
    theta: list[float]
    top_topics: list[TopTopic]
    all_oov: bool


class CommentIn(BaseModel):
    id: str
    text: str
    section: str = ""
    subsection: Optional[str] = None
    article_id: str = ""
    timestamp: str = ""

    @field_validator("text")
    @classmethod
    def text_not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("text must be non-empty")
        return v


class EnqueueRequest(BaseModel):
    comments: list[CommentIn]


class EnqueueResponse(BaseModel):
    count: int


class QueueItemOut(BaseModel):
    comment: CommentIn
    probability: float
    predicted_label: int
    top_topics: list[TopTopic]
    status: Literal["pending", "approved", "blocked"]
    decided_by: Optional[str] = None
    decided_at: Optional[str] = None
    enqueued_at: str


class QueuePage(BaseModel):
    items: list[QueueItemOut]
    total: int
    offset: int


class DecisionRequest(BaseModel):
    decision: Literal["approve", "block"]
    moderator_id: str


class DecisionRecordOut(BaseModel):
    comment_id: str
    moderator_decision: Literal["approve", "block"]
    moderator_id: str
    model_prediction: int
    model_probability: float
    agreed: bool
    decided_at: str


class StatsResponse(BaseModel):
    n_pending: int
    n_approved: int
    n_blocked: int
    n_decisions: int
    agreement_rate: Optional[float]
