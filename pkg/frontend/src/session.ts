// View state plus the action flow. The server owns all session state; this
// class only accumulates what events said and mirrors status after actions.

import { ApiClient, ApiError } from "./client";
import type {
  Candidate,
  CitationResult,
  DraftSegment,
  GenerationEvent,
} from "./types";

export class SessionView {
  sessionId = "";
  status = "generating";
  /** Token event texts in arrival order; the draft is exactly their join. */
  tokens: string[] = [];
  segments: DraftSegment[] = [];
  /** Candidates exactly as the last retrieval-pause delivered them. */
  candidates: Candidate[] | null = null;
  accepted: string[] = [];
  stopReason: string | null = null;
  busyNotice: string | null = null;
  actionInFlight = false;
  streaming = false;

  get draftText(): string {
    return this.tokens.join("");
  }

  get panelVisible(): boolean {
    return this.status === "paused-at-ret";
  }

  get chipKeys(): string[] {
    return this.segments
      .filter((s): s is { type: "chip"; key: string } => s.type === "chip")
      .map((s) => s.key);
  }

  applyEvent(ev: GenerationEvent): void {
    switch (ev.kind) {
      case "token":
        this.tokens.push(ev.payload.text);
        this.segments.push({ type: "text", value: ev.payload.text });
        break;
      case "retrieval-pause":
        this.status = "paused-at-ret";
        this.candidates = ev.payload.candidates;
        break;
      case "citation-resolved":
        if (ev.payload.action === "accept" && ev.payload.ref_id) {
          this.segments.push({ type: "chip", key: ev.payload.ref_id });
        }
        this.status = "generating";
        this.candidates = null;
        break;
      case "done":
        this.status = "done";
        this.stopReason = ev.payload.stop;
        break;
    }
  }
}

export class SessionController {
  readonly view = new SessionView();

  constructor(private readonly client: ApiClient) {}

  async create(title: string, abstract = ""): Promise<void> {
    const created = await this.client.createSession({ title, abstract });
    this.view.sessionId = created.session_id;
    this.view.status = created.status;
  }

  /** Run one generation burst; ends at a pause or a done event. */
  async stream(maxNewTokens: number | null = null): Promise<void> {
    if (this.view.streaming) return;
    this.view.streaming = true;
    this.view.busyNotice = null;
    try {
      await this.client.step(this.view.sessionId, maxNewTokens, (ev) =>
        this.view.applyEvent(ev),
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 503) {
        this.view.busyNotice = err.message;
        return;
      }
      // stream cut mid-flight: the session is durable server-side, so a
      // plain GET restores authoritative status and any pending candidates
      await this.resync();
    } finally {
      this.view.streaming = false;
    }
  }

  /** Re-read server state after a disconnect or an out-of-band change. */
  async resync(): Promise<void> {
    const detail = await this.client.getSession(this.view.sessionId);
    this.view.status = detail.state.status;
    this.view.candidates = detail.candidates;
    this.view.accepted = [...detail.state.accepted];
  }

  async accept(refId: string, external = false): Promise<void> {
    await this.resolve("accept", refId, external);
  }

  async skip(): Promise<void> {
    await this.resolve("skip");
  }

  async trigger(): Promise<void> {
    await this.resolve("trigger");
  }

  private async resolve(
    action: "accept" | "skip" | "trigger",
    refId?: string,
    external = false,
  ): Promise<void> {
    if (this.view.actionInFlight) {
      throw new Error("a citation action is already in flight");
    }
    this.view.actionInFlight = true;
    try {
      const result: CitationResult = await this.client.citation(
        this.view.sessionId,
        action,
        refId,
        external,
      );
      this.view.applyEvent(result.event);
      this.view.status = result.status;
      this.view.accepted = [...result.accepted];
      if (result.status !== "paused-at-ret") this.view.candidates = null;
    } finally {
      this.view.actionInFlight = false;
    }
  }

  async exportBytes(format: "tex" | "bib"): Promise<Uint8Array> {
    return this.client.exportDoc(this.view.sessionId, format);
  }
}
