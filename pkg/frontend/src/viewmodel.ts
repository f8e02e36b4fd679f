import type { QueueItem, QueuePage, TopTopic } from "./types";

/** Topics below this weight are noise and never rendered as chips. */
export const CHIP_WEIGHT_FLOOR = 0.1;
const CHIP_WORDS_SHOWN = 5;

export interface TopicChip {
  topicId: number;
  weight: number;
  /** short label: the first few topic words */
  label: string;
  /** hover text: the full word list */
  title: string;
}

export interface QueueRow {
  id: string;
  text: string;
  section: string;
  probability: number;
  probabilityPct: string;
  predictedLabel: number;
  status: QueueItem["status"];
  decidedBy: string | null;
  chips: TopicChip[];
}

export function topicChips(topics: TopTopic[]): TopicChip[] {
  return topics
    .filter((t) => t.weight >= CHIP_WEIGHT_FLOOR)
    .map((t) => ({
      topicId: t.topic_id,
      weight: t.weight,
      label: t.words.slice(0, CHIP_WORDS_SHOWN).join(" "),
      title: t.words.join(" "),
    }));
}

export function toRow(item: QueueItem): QueueRow {
  return {
    id: item.comment.id,
    text: item.comment.text,
    section: item.comment.section,
    probability: item.probability,
    probabilityPct: `${(item.probability * 100).toFixed(1)}%`,
    predictedLabel: item.predicted_label,
    status: item.status,
    decidedBy: item.decided_by,
    chips: topicChips(item.top_topics),
  };
}

/** The server already orders the queue; the client must not reorder it. */
export function toRows(page: QueuePage): QueueRow[] {
  return page.items.map(toRow);
}
