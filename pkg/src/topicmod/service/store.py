"""Moderation queue state with an append-only decision log.

The log is the source of truth: replaying it reconstructs queue state
exactly.  The engine is a JSONL file; every mutation appends one record.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional


class DuplicateIdError(ValueError):
    def __init__(self, ids: list[str]):
        super().__init__(f"comment ids already enqueued: {', '.join(ids)}")
        self.ids = ids


class UnknownIdError(KeyError):
    pass


class AlreadyDecidedError(ValueError):
    pass


@dataclass
class QueueItem:
    comment: dict           # serialized Comment fields
    probability: float
    predicted_label: int
    theta: list[float]
    top_topics: list[dict]  # topic_id, weight, words
    all_oov: bool = False
    status: str = "pending"  # pending | approved | blocked
    decided_by: Optional[str] = None
    decided_at: Optional[str] = None
    enqueued_at: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "QueueItem":
        return cls(**d)


@dataclass(frozen=True)
class DecisionRecord:
    comment_id: str
    moderator_decision: str  # approve | block
    moderator_id: str
    model_prediction: int
    model_probability: float
    agreed: bool
    decided_at: str

    def to_dict(self) -> dict:
        return asdict(self)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class ModerationStore:
    """In-memory queue backed by an append-only JSONL log."""

    def __init__(self, log_path: Optional[str | Path] = None):
        self._items: dict[str, QueueItem] = {}
        self._order: list[str] = []
        self._decisions: list[DecisionRecord] = []
        self._lock = threading.Lock()
        self._log_path = Path(log_path) if log_path else None

    def _append_log(self, record: dict) -> None:
        if self._log_path is None:
            return
        with self._log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")

    def enqueue(self, items: list[QueueItem]) -> int:
        with self._lock:
            duplicates = [it.comment["id"] for it in items
                          if it.comment["id"] in self._items]
            seen: set[str] = set()
            for it in items:
                cid = it.comment["id"]
                if cid in seen:
                    duplicates.append(cid)
                seen.add(cid)
            if duplicates:
                raise DuplicateIdError(sorted(set(duplicates)))
            for it in items:
                if not it.enqueued_at:
                    it.enqueued_at = _now()
                self._items[it.comment["id"]] = it
                self._order.append(it.comment["id"])
                self._append_log({"op": "enqueue", "item": it.to_dict()})
            return len(items)

    def list_items(self, status: Optional[str] = None,
                   section: Optional[str] = None,
                   order: str = "confidence_desc",
                   offset: int = 0,
                   limit: Optional[int] = None) -> tuple[list[QueueItem], int]:
        with self._lock:
            items = [self._items[cid] for cid in self._order]
        if status is not None:
            items = [it for it in items if it.status == status]
        if section is not None:
            items = [it for it in items if it.comment.get("section") == section]
        if order == "confidence_desc":
            items.sort(key=lambda it: -it.probability)
        elif order != "time":
            raise ValueError(f"unknown order {order!r}")
        total = len(items)
        if limit is None:
            return items[offset:], total
        return items[offset:offset + limit], total

    def decide(self, comment_id: str, decision: str,
               moderator_id: str) -> DecisionRecord:
        if decision not in ("approve", "block"):
            raise ValueError(f"unknown decision {decision!r}")
        with self._lock:
            item = self._items.get(comment_id)
            if item is None:
                raise UnknownIdError(comment_id)
            if item.status != "pending":
                raise AlreadyDecidedError(f"comment {comment_id} already "
                                          f"{item.status}")
            decided_at = _now()
            item.status = "blocked" if decision == "block" else "approved"
            item.decided_by = moderator_id
            item.decided_at = decided_at
            record = DecisionRecord(
                comment_id=comment_id,
                moderator_decision=decision,
                moderator_id=moderator_id,
                model_prediction=item.predicted_label,
                model_probability=item.probability,
                agreed=(decision == "block") == (item.predicted_label == 1),
                decided_at=decided_at,
            )
            self._decisions.append(record)
            self._append_log({"op": "decision", "record": record.to_dict()})
            return record

    def stats(self) -> dict:
        with self._lock:
            counts = {"pending": 0, "approved": 0, "blocked": 0}
            for item in self._items.values():
                counts[item.status] += 1
            n_decided = len(self._decisions)
            agreed = sum(1 for d in self._decisions if d.agreed)
        return {
            "n_pending": counts["pending"],
            "n_approved": counts["approved"],
            "n_blocked": counts["blocked"],
            "n_decisions": n_decided,
            "agreement_rate": agreed / n_decided if n_decided else None,
        }

    def snapshot(self) -> dict[str, dict]:
        """Queue state keyed by comment id, for replay verification."""
        with self._lock:
            return {cid: self._items[cid].to_dict() for cid in self._order}

    @classmethod
    def replay(cls, log_path: str | Path) -> "ModerationStore":
        """Rebuild queue state by re-applying the append-only log."""
        store = cls(log_path=None)
        path = Path(log_path)
        if not path.exists():
            return store
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                if record["op"] == "enqueue":
                    store.enqueue([QueueItem.from_dict(record["item"])])
                elif record["op"] == "decision":
                    d = record["record"]
                    item = store._items[d["comment_id"]]
                    item.status = ("blocked" if d["moderator_decision"] == "block"
                                   else "approved")
                    item.decided_by = d["moderator_id"]
                    item.decided_at = d["decided_at"]
                    store._decisions.append(DecisionRecord(**d))
        return store
