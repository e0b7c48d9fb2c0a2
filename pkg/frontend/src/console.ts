/** Console wiring: query box, history, answer panel, plan inspection.
 *
 * One query is in flight at a time; a response is only shown if it still
 * matches the latest submission (stale answers are dropped by id).
 */

import { ApiError, Client } from "./api.js";
import { renderInspection } from "./inspect.js";
import { escapeHtml, renderPlan } from "./render.js";
import { hasResult, type QueryResponse } from "./types.js";

interface HistoryEntry {
  query: string;
  responseId: string;
}

export class Console {
  private history: HistoryEntry[] = [];
  private responses = new Map<string, QueryResponse>();
  private pending: string | null = null;

  constructor(
    private client: Client,
    private answerEl: HTMLElement,
    private inspectEl: HTMLElement,
    private historyEl: HTMLElement,
    private statusEl: HTMLElement,
  ) {}

  async submit(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed) return;
    this.statusEl.textContent = "asking…";
    this.pending = trimmed;
    try {
      const response = await this.client.submitQuery(trimmed);
      if (this.pending !== trimmed) return; // superseded meanwhile
      this.responses.set(response.id, response);
      this.history.push({ query: trimmed, responseId: response.id });
      this.renderHistory();
      this.show(response);
      this.statusEl.textContent = "";
    } catch (error) {
      if (this.pending !== trimmed) return;
      this.showError(error);
    } finally {
      if (this.pending === trimmed) this.pending = null;
    }
  }

  /** Re-display a history entry; falls back to the service cache. */
  async inspect(responseId: string): Promise<void> {
    const kept = this.responses.get(responseId);
    if (kept) {
      this.show(kept);
      return;
    }
    try {
      const response = await this.client.cachedResponse(responseId);
      this.responses.set(responseId, response);
      this.show(response);
    } catch (error) {
      if (error instanceof ApiError) {
        this.statusEl.textContent = error.message;
      } else {
        this.showError(error);
      }
    }
  }

  show(response: QueryResponse): void {
    if (hasResult(response)) {
      this.answerEl.innerHTML = renderPlan(response.representation);
    } else {
      this.answerEl.innerHTML = `<p class="muted">plan only; no result</p>`;
    }
    this.inspectEl.innerHTML = renderInspection(response);
    this.statusEl.textContent = "";
  }

  showError(error: unknown): void {
    if (error instanceof ApiError) {
      const stage = error.stage ? ` <span class="stage">[${escapeHtml(error.stage)}]</span>` : "";
      const hints = error.suggestions.length
        ? `<p>did you mean: ${error.suggestions.map(escapeHtml).join(", ")}?</p>`
        : "";
      this.answerEl.innerHTML =
        `<div class="error-panel">${stage} ${escapeHtml(error.message)}${hints}</div>`;
    } else {
      this.answerEl.innerHTML =
        `<div class="error-panel">service unreachable: ` +
        `${escapeHtml(String(error))}</div>`;
    }
    this.inspectEl.innerHTML = "";
    this.statusEl.textContent = "";
  }

  private renderHistory(): void {
    this.historyEl.innerHTML = this.history.map((entry, i) =>
      `<li><a href="#" data-response="${escapeHtml(entry.responseId)}">` +
      `${escapeHtml(entry.query)}</a></li>`).join("");
    this.historyEl.querySelectorAll("a[data-response]").forEach((a) => {
      a.addEventListener("click", (event) => {
        event.preventDefault();
        const id = (a as HTMLElement).dataset.response!;
        void this.inspect(id);
      });
    });
  }
}
