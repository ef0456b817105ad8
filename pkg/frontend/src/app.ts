// Single-page arena app: create a session, render the position, submit moves,
// poll for multi-tab freshness.  State only ever updates from server
// responses (no optimistic UI), and at most one mutation is in flight.

import { ApiClient, ApiError, SessionRequest, SessionState } from "./api.js";
import { InlineError, renderPosition } from "./view.js";

export class ArenaApp {
  state: SessionState | null = null;
  private error: InlineError | null = null;
  private inflight = false;
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    public root: HTMLElement,
    public client: ApiClient,
    private pollMs = 1000,
  ) {
    this.renderForm();
  }

  async createSession(req: SessionRequest): Promise<void> {
    try {
      this.state = await this.client.createSession(req);
      this.error = null;
      this.startPolling();
    } catch (e) {
      this.error = { move: "", detail: e instanceof ApiError ? e.detail : String(e) };
    }
    this.render();
  }

  async submitMove(move: string): Promise<void> {
    if (this.inflight || !this.state) return;
    this.inflight = true;
    try {
      this.state = await this.client.postMove(this.state.id, move);
      this.error = null;
    } catch (e) {
      this.error = { move, detail: e instanceof ApiError ? e.detail : String(e) };
    } finally {
      this.inflight = false;
    }
    this.render();
  }

  async refresh(): Promise<void> {
    if (this.inflight || !this.state) return;
    try {
      this.state = await this.client.getSession(this.state.id);
      this.render();
    } catch {
      // transient poll failures keep the last known state
    }
  }

  startPolling(): void {
    this.stopPolling();
    this.pollTimer = setInterval(() => {
      if (this.state?.status === "finished") {
        this.stopPolling();
        return;
      }
      void this.refresh();
    }, this.pollMs);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  dispose(): void {
    this.stopPolling();
  }

  private renderForm(): void {
    const form = document.createElement("form");
    form.className = "new-session";
    form.innerHTML = `
      <input name="formula" placeholder="formula" size="40">
      <select name="humanRole">
        <option value="environment">environment (⊥)</option>
        <option value="machine">machine (⊤)</option>
      </select>
      <button type="submit">create</button>
    `;
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const formula = (form.elements.namedItem("formula") as HTMLInputElement).value;
      const humanRole = (form.elements.namedItem("humanRole") as HTMLSelectElement)
        .value as SessionRequest["humanRole"];
      void this.createSession({ formula, humanRole });
    });
    this.root.appendChild(form);
  }

  render(): void {
    let arena = this.root.querySelector<HTMLElement>(".arena");
    if (!arena) {
      arena = document.createElement("div");
      arena.className = "arena";
      this.root.appendChild(arena);
    }
    arena.replaceChildren();
    if (this.error && !this.state) {
      const banner = document.createElement("div");
      banner.className = "banner error-inline";
      banner.textContent = this.error.detail;
      arena.appendChild(banner);
      return;
    }
    if (!this.state) return;
    arena.appendChild(renderPosition(
      this.state, (m) => void this.submitMove(m), this.error ?? undefined));

    // manual move entry: the server remains the authority, so a typed move is
    // simply submitted and any 400 surfaces inline
    const manual = document.createElement("form");
    manual.className = "manual-move";
    manual.innerHTML = `
      <input name="move" placeholder="move" size="12">
      <button type="submit">play move</button>
    `;
    manual.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const move = (manual.elements.namedItem("move") as HTMLInputElement).value.trim();
      if (move) void this.submitMove(move);
    });
    arena.appendChild(manual);
  }
}
