import { ApiClient } from "./api";
import { QueueController, QueueState } from "./controller";
import type { QueueRow } from "./viewmodel";

const STATUS_LABEL: Record<QueueRow["status"], string> = {
  pending: "Pending",
  approved: "Approved",
  blocked: "Blocked",
};

function renderRow(row: QueueRow, controller: QueueController): HTMLElement {
  const card = document.createElement("article");
  card.className = `queue-row queue-row--${row.status}`;
  card.dataset.commentId = row.id;

  const meta = document.createElement("div");
  meta.className = "queue-row__meta";
  const prob = document.createElement("span");
  prob.className = row.predictedLabel === 1 ? "prob prob--block" : "prob";
  prob.textContent = row.probabilityPct;
  const section = document.createElement("span");
  section.className = "section-tag";
  section.textContent = row.section || "(no section)";
  const status = document.createElement("span");
  status.className = "status-tag";
  status.textContent = STATUS_LABEL[row.status];
  if (row.decidedBy) status.textContent += ` by ${row.decidedBy}`;
  meta.append(prob, section, status);
  card.append(meta);

  const text = document.createElement("p");
  text.className = "queue-row__text";
  text.textContent = row.text;
  card.append(text);

  if (row.chips.length) {
    const chips = document.createElement("div");
    chips.className = "chips";
    for (const chip of row.chips) {
      const el = document.createElement("span");
      el.className = "chip";
      el.textContent = `${(chip.weight * 100).toFixed(0)}% ${chip.label}`;
      el.title = chip.title;
      chips.append(el);
    }
    card.append(chips);
  }

  if (row.status === "pending") {
    const actions = document.createElement("div");
    actions.className = "queue-row__actions";
    for (const [label, decision] of [["Approve", "approve"], ["Block", "block"]] as const) {
      const button = document.createElement("button");
      button.textContent = label;
      button.className = decision === "block" ? "btn btn--block" : "btn";
      button.addEventListener("click", () => controller.decide(row.id, decision));
      actions.append(button);
    }
    card.append(actions);
  }

  return card;
}

function render(root: HTMLElement, state: QueueState, controller: QueueController): void {
  root.innerHTML = "";

  if (state.error) {
    const banner = document.createElement("div");
    banner.className = "banner banner--error";
    banner.textContent = state.error;
    const retry = document.createElement("button");
    retry.textContent = "Retry";
    retry.addEventListener("click", () => controller.load());
    banner.append(retry);
    root.append(banner);
  }

  const count = document.createElement("div");
  count.className = "queue-count";
  count.textContent = state.loading ? "Loading..." : `${state.total} item(s)`;
  root.append(count);

  const list = document.createElement("div");
  list.className = "queue-list";
  for (const row of state.rows) list.append(renderRow(row, controller));
  root.append(list);
}

export function mountApp(selector: string, baseUrl: string, moderatorId: string): QueueController {
  const root = document.querySelector<HTMLElement>(selector);
  if (!root) throw new Error(`mount point ${selector} not found`);
  const api = new ApiClient(baseUrl);
  const controller = new QueueController(api, moderatorId, (state) =>
    render(root, state, controller)
  );
  void controller.load();
  return controller;
}
