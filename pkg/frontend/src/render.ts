// Pure view -> markup helpers, kept DOM-free so they unit test in node.

import type { Candidate, DraftSegment } from "./types";

const SNIPPET_LIMIT = 160;

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Abstract snippet capped at 160 characters, full text kept for hover. */
export function snippet(abstract: string): string {
  if (abstract.length <= SNIPPET_LIMIT) return abstract;
  return abstract.slice(0, SNIPPET_LIMIT - 1) + "…";
}

export function renderDraftHtml(segments: DraftSegment[]): string {
  return segments
    .map((s) =>
      s.type === "text"
        ? escapeHtml(s.value)
        : `<span class="chip" data-key="${escapeHtml(s.key)}">[${escapeHtml(s.key)}]</span>`,
    )
    .join("");
}

export interface PanelItem {
  refId: string;
  title: string;
  snippet: string;
  fullAbstract: string;
  score: number;
}

export function renderPanel(candidates: Candidate[]): PanelItem[] {
  return candidates.map((c) => ({
    refId: c.ref_id,
    title: c.title,
    snippet: snippet(c.abstract),
    fullAbstract: c.abstract,
    score: c.score,
  }));
}

export function statusLabel(status: string, busyNotice: string | null): string {
  if (busyNotice) return `queued: ${busyNotice}`;
  switch (status) {
    case "generating":
      return "drafting";
    case "paused-at-ret":
      return "citation needed";
    case "done":
      return "finished";
    default:
      return status;
  }
}

/** Keys of every @article entry, for the bibliography preview. */
export function bibliographyKeys(bibText: string): string[] {
  const keys: string[] = [];
  const re = /@article\{([^,]*),/g;
  let m = re.exec(bibText);
  while (m !== null) {
    keys.push(m[1] ?? "");
    m = re.exec(bibText);
  }
  return keys;
}
