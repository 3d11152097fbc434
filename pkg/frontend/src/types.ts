/** Wire types mirroring the review service's JSON schema. */

export type ForceKind = "Proposition" | "Clarification" | "Evaluation" | "Validation";
export type ClarificationKind = "Solution" | "Problem";
export type Polarity = "Positive" | "Negative" | "Neutral";
export type ContentKind = "Constraint" | "Action" | "Decision" | "Other";
export type Sphere = "Private" | "Public";
export type Status = "Draft" | "Open" | "Answered" | "Validated" | "Rejected" | "Archived";
export type RefKind = "Answers" | "Validates" | "Clarifies";

export interface Force {
  kind: ForceKind;
  clarification_kind?: ClarificationKind;
  polarity?: Polarity;
}

export interface Utterance {
  text: string;
  content_kind: ContentKind;
}

export interface AnchorData {
  face: number;
  bary: [number, number, number];
  normal_offset: number;
}

export interface ThreadEntry {
  author: string;
  at: string;
  text: string;
}

export interface Reference {
  target: string;
  kind: RefKind;
}

export interface Annotation {
  id: string;
  document: string;
  document_revision: number;
  author: string;
  created_at: string;
  force: Force;
  utterance: Utterance;
  anchor: AnchorData;
  sphere: Sphere;
  status: Status;
  orphaned: boolean;
  version: number;
  thread: ThreadEntry[];
  references: Reference[];
}

export interface DocumentInfo {
  id: string;
  name: string;
  alive: boolean;
  revisions: { revision: number; content_hash: string; created_at: string }[];
}

export interface MeshPayload {
  document: string;
  revision: number;
  content_hash: string;
  vertices: number[][];
  faces: number[][];
}

export interface SessionInfo {
  id: string;
  document: string;
  revision: number;
  chair: string;
  minute_taker: string;
  participants: Record<string, string>;
  state: "Open" | "Closed";
  event_count: number;
}

export type EventKind =
  | "Joined"
  | "Left"
  | "AnnotationCreated"
  | "ReplyAdded"
  | "StatusChanged"
  | "ViewpointShared"
  | "SessionClosed";

export interface SessionEvent {
  seq: number;
  at: string;
  kind: EventKind;
  // kind-specific record; {redacted: true} when the event concerns
  // someone else's private annotation
  payload: Record<string, unknown>;
}

export interface MinuteEntryPayload {
  annotation: {
    id: string;
    force: Force;
    utterance: Utterance;
    status: Status;
    author: string;
    anchor: AnchorData;
  };
  viewpoint: { position: number[]; target: number[]; up: number[]; source: "shared" | "default" };
  thread: ThreadEntry[];
}

export interface MinutePayload {
  id: string;
  session: string | null;
  document: string;
  revision: number;
  generated_at: string;
  sections: { force_kind: ForceKind; entries: MinuteEntryPayload[] }[];
}

export interface Viewpoint {
  position: [number, number, number];
  target: [number, number, number];
  up: [number, number, number];
}
