import type { Decision, DecisionRecord, QueueItem, QueuePage, Stats } from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectOk(response: Response): Promise<Response> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body, keep statusText
    }
    throw new ApiError(response.status, detail);
  }
  return response;
}

/** Thin typed client over the moderation service. `fetchFn` is injected so
 * tests can run without a server or a DOM. */
export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init)
  ) {}

  async fetchQueue(params: {
    status?: string;
    section?: string;
    offset?: number;
    limit?: number;
  } = {}): Promise<QueuePage> {
    const query = new URLSearchParams();
    if (params.status) query.set("status", params.status);
    if (params.section) query.set("section", params.section);
    if (params.offset !== undefined) query.set("offset", String(params.offset));
    if (params.limit !== undefined) query.set("limit", String(params.limit));
    const suffix = query.toString() ? `?${query}` : "";
    const response = await expectOk(await this.fetchFn(`${this.baseUrl}/queue${suffix}`));
    return response.json();
  }

  async postDecision(
    commentId: string,
    decision: Decision,
    moderatorId: string
  ): Promise<DecisionRecord> {
    const response = await expectOk(
      await this.fetchFn(`${this.baseUrl}/queue/${encodeURIComponent(commentId)}/decision`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ decision, moderator_id: moderatorId }),
      })
    );
    return response.json();
  }

  /** Locate one item by id regardless of its current status. */
  async findItem(commentId: string): Promise<QueueItem | null> {
    for (const status of ["pending", "approved", "blocked"]) {
      const page = await this.fetchQueue({ status });
      const match = page.items.find((it) => it.comment.id === commentId);
      if (match) return match;
    }
    return null;
  }

  async fetchStats(): Promise<Stats> {
    const response = await expectOk(await this.fetchFn(`${this.baseUrl}/stats`));
    return response.json();
  }
}
