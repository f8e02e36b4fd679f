import { ApiClient, ApiError } from "./api";
import { toRow, toRows, QueueRow } from "./viewmodel";
import type { Decision } from "./types";

export interface QueueState {
  rows: QueueRow[];
  total: number;
  /** non-null when the last server call failed and a retry is offered */
  error: string | null;
  loading: boolean;
}

/** Queue presenter: owns the state, talks to the API, pushes every change
 * through `onChange`. Rendering is someone else's job. */
export class QueueController {
  private state: QueueState = { rows: [], total: 0, error: null, loading: false };
  private inflight = new Set<string>();

  constructor(
    private api: ApiClient,
    private moderatorId: string,
    private onChange: (state: QueueState) => void
  ) {}

  getState(): QueueState {
    return this.state;
  }

  private push(patch: Partial<QueueState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  async load(filters: { section?: string; status?: string } = {}): Promise<void> {
    this.push({ loading: true, error: null });
    try {
      const page = await this.api.fetchQueue(filters);
      this.push({ rows: toRows(page), total: page.total, loading: false });
    } catch (err) {
      this.push({ loading: false, error: describe(err) });
    }
  }

  /** Submit a moderator decision. At most one POST is ever in flight per
   * comment; repeat clicks while it is pending are ignored. A conflict
   * response means someone else decided first, so the row is refreshed
   * from the server instead of being marked locally. */
  async decide(commentId: string, decision: Decision): Promise<void> {
    const row = this.state.rows.find((r) => r.id === commentId);
    if (!row || row.status !== "pending" || this.inflight.has(commentId)) return;
    this.inflight.add(commentId);
    try {
      const record = await this.api.postDecision(commentId, decision, this.moderatorId);
      this.updateRow(commentId, {
        status: decision === "block" ? "blocked" : "approved",
        decidedBy: record.moderator_id,
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        await this.refreshRow(commentId);
      } else {
        this.push({ error: describe(err) });
      }
    } finally {
      this.inflight.delete(commentId);
    }
  }

  private async refreshRow(commentId: string): Promise<void> {
    try {
      const item = await this.api.findItem(commentId);
      if (item) {
        const fresh = toRow(item);
        this.updateRow(commentId, {
          status: fresh.status,
          decidedBy: fresh.decidedBy,
        });
      }
    } catch (err) {
      this.push({ error: describe(err) });
    }
  }

  private updateRow(commentId: string, patch: Partial<QueueRow>): void {
    this.push({
      rows: this.state.rows.map((r) => (r.id === commentId ? { ...r, ...patch } : r)),
    });
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `Server error ${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
