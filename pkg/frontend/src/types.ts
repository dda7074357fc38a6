// Wire types, mirroring the service JSON exactly.

export interface Candidate {
  ref_id: string;
  score: number;
  title: string;
  abstract: string;
}

export type GenerationEvent =
  | { kind: "token"; payload: { id: number; text: string } }
  | { kind: "retrieval-pause"; payload: { candidates: Candidate[] } }
  | { kind: "citation-resolved"; payload: { action: string; ref_id: string | null } }
  | { kind: "done"; payload: { stop: string } };

export interface SessionSummary {
  session_id: string;
  status: string;
}

export interface SessionDetail {
  state: {
    session_id: string;
    status: string;
    accepted: string[];
    [key: string]: unknown;
  };
  created_at: number;
  updated_at: number;
  owner: string;
  text: string;
  candidates: Candidate[] | null;
}

export interface CitationResult {
  status: string;
  event: GenerationEvent;
  accepted: string[];
}

export type CitationAction = "accept" | "skip" | "trigger";

/** Draft content in arrival order: token text or a server-issued cite chip. */
export type DraftSegment =
  | { type: "text"; value: string }
  | { type: "chip"; key: string };
