// Typed client for the session service. The fetch implementation is
// injectable so tests run against an in-memory mock with no sockets.

import { NdjsonParser } from "./ndjson";
import type {
  CitationAction,
  CitationResult,
  GenerationEvent,
  SessionDetail,
  SessionSummary,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof globalThis.fetch = globalThis.fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(body: {
    title: string;
    abstract?: string;
    section?: string;
    config?: Record<string, unknown>;
  }): Promise<SessionSummary> {
    const res = await this.fetchImpl(this.url("/v1/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    await raiseForStatus(res);
    return (await res.json()) as SessionSummary;
  }

  async getSession(id: string): Promise<SessionDetail> {
    const res = await this.fetchImpl(this.url(`/v1/sessions/${id}`));
    await raiseForStatus(res);
    return (await res.json()) as SessionDetail;
  }

  /** Stream one generation burst, invoking onEvent for each record in order. */
  async step(
    id: string,
    maxNewTokens: number | null,
    onEvent: (ev: GenerationEvent) => void,
  ): Promise<void> {
    const res = await this.fetchImpl(this.url(`/v1/sessions/${id}/steps`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ max_new_tokens: maxNewTokens }),
    });
    await raiseForStatus(res);
    const parser = new NdjsonParser();
    const deliver = (records: unknown[]) => {
      for (const r of records) onEvent(r as GenerationEvent);
    };
    if (res.body) {
      const reader = res.body.getReader();
      const decoder = new TextDecoder();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        deliver(parser.push(decoder.decode(value, { stream: true })));
      }
      deliver(parser.push(decoder.decode()));
    } else {
      deliver(parser.push(await res.text()));
    }
    deliver(parser.flush());
  }

  async citation(
    id: string,
    action: CitationAction,
    refId?: string,
    external = false,
  ): Promise<CitationResult> {
    const res = await this.fetchImpl(this.url(`/v1/sessions/${id}/citation`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ action, ref_id: refId ?? null, external }),
    });
    await raiseForStatus(res);
    return (await res.json()) as CitationResult;
  }

  /** Raw export bytes, so downloads match the service response exactly. */
  async exportDoc(id: string, format: "tex" | "bib"): Promise<Uint8Array> {
    const res = await this.fetchImpl(
      this.url(`/v1/sessions/${id}/export?format=${format}`),
    );
    await raiseForStatus(res);
    return new Uint8Array(await res.arrayBuffer());
  }

  exportUrl(id: string, format: "tex" | "bib"): string {
    return this.url(`/v1/sessions/${id}/export?format=${format}`);
  }
}
