"""HTTP scoring and moderation-queue service."""

from .app import ModelBundle, create_app
from .store import ModerationStore, QueueItem, DecisionRecord

__all__ = ["ModelBundle", "create_app", "ModerationStore", "QueueItem",
           "DecisionRecord"]
