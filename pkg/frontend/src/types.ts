// Payload shapes mirrored from the moderation service REST API.

export interface TopTopic {
  topic_id: number;
  weight: number;
  words: string[];
}

export interface CommentPayload {
  id: string;
  text: string;
  section: string;
  subsection: string | null;
  article_id: string;
  timestamp: string;
}

export type ItemStatus = "pending" | "approved" | "blocked";

export interface QueueItem {
  comment: CommentPayload;
  probability: number;
  predicted_label: number;
  top_topics: TopTopic[];
  status: ItemStatus;
  decided_by: string | null;
  decided_at: string | null;
  enqueued_at: string;
}

export interface QueuePage {
  items: QueueItem[];
  total: number;
  offset: number;
}

export type Decision = "approve" | "block";

export interface DecisionRecord {
  comment_id: string;
  moderator_decision: Decision;
  moderator_id: string;
  model_prediction: number;
  model_probability: number;
  agreed: boolean;
  decided_at: string;
}

export interface Stats {
  n_pending: number;
  n_approved: number;
  n_blocked: number;
  n_decisions: number;
  agreement_rate: number | null;
}
