/** Typed client for the review service's HTTP API. */

import type {
  Annotation,
  DocumentInfo,
  MeshPayload,
  MinutePayload,
  SessionEvent,
  SessionInfo,
  Status,
} from "./types.js";
import type { DraftSubmission } from "./pick.js";
import type { FilterState } from "./filters.js";
import { toQueryParams } from "./filters.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
    readonly violations: string[] = [],
  ) {
    super(`${code}: ${detail}`);
  }
}

export class ReviewClient {
  constructor(
    readonly baseUrl: string,
    readonly token: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      ...(body !== undefined ? { body: JSON.stringify(body) } : {}),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const err = parsed ?? {};
      throw new ApiError(
        response.status,
        String(err.error ?? "HTTP_ERROR"),
        String(err.detail ?? response.statusText),
        (err.violations as string[]) ?? [],
      );
    }
    return parsed as T;
  }

  listDocuments(): Promise<DocumentInfo[]> {
    return this.request("GET", "/documents");
  }

  uploadDocument(name: string, format: "obj" | "stl", data: Uint8Array): Promise<DocumentInfo> {
    return this.request("POST", "/documents", {
      name,
      format,
      data_base64: base64Of(data),
    });
  }

  getMesh(documentId: string, revision?: number): Promise<MeshPayload> {
    const suffix = revision != null ? `?revision=${revision}` : "";
    return this.request("GET", `/documents/${documentId}/mesh${suffix}`);
  }

  createAnnotation(
    documentId: string,
    revision: number,
    submission: DraftSubmission,
  ): Promise<Annotation> {
    return this.request("POST", "/annotations", {
      document: documentId,
      revision,
      ...submission,
    });
  }

  queryAnnotations(
    filters: FilterState,
    scope?: { document?: string; revision?: number },
  ): Promise<Annotation[]> {
    const params = toQueryParams(filters);
    if (scope?.document) params.set("document", scope.document);
    if (scope?.revision != null) params.set("revision", String(scope.revision));
    const qs = params.toString();
    return this.request("GET", `/annotations${qs ? `?${qs}` : ""}`);
  }

  reply(annotationId: string, text: string): Promise<Annotation> {
    return this.request("POST", `/annotations/${annotationId}/replies`, { text });
  }

  setStatus(annotationId: string, status: Status): Promise<Annotation> {
    return this.request("POST", `/annotations/${annotationId}/status`, { status });
  }

  publish(annotationId: string): Promise<Annotation> {
    return this.request("POST", `/annotations/${annotationId}/publish`);
  }

  openSession(documentId: string, revision: number, chair: string, minuteTaker: string): Promise<SessionInfo> {
    return this.request("POST", "/sessions", {
      document: documentId,
      revision,
      chair,
      minute_taker: minuteTaker,
    });
  }

  joinSession(sessionId: string): Promise<SessionInfo> {
    return this.request("POST", `/sessions/${sessionId}/join`);
  }

  sessionCreateAnnotation(sessionId: string, submission: DraftSubmission): Promise<SessionEvent> {
    return this.request("POST", `/sessions/${sessionId}/events`, {
      action: "create_annotation",
      ...submission,
    });
  }

  sessionReply(sessionId: string, annotationId: string, text: string): Promise<SessionEvent> {
    return this.request("POST", `/sessions/${sessionId}/events`, {
      action: "reply",
      annotation: annotationId,
      text,
    });
  }

  sessionSetStatus(sessionId: string, annotationId: string, status: Status): Promise<SessionEvent> {
    return this.request("POST", `/sessions/${sessionId}/events`, {
      action: "transition_status",
      annotation: annotationId,
      status,
    });
  }

  shareViewpoint(
    sessionId: string,
    position: number[],
    target: number[],
    up: number[],
  ): Promise<SessionEvent> {
    return this.request("POST", `/sessions/${sessionId}/events`, {
      action: "share_viewpoint",
      position,
      target,
      up,
    });
  }

  closeSession(sessionId: string): Promise<{ session: string; minute_id: string }> {
    return this.request("POST", `/sessions/${sessionId}/close`);
  }

  sessionMinute(sessionId: string): Promise<MinutePayload> {
    return this.request("GET", `/sessions/${sessionId}/minute`);
  }
}

function base64Of(data: Uint8Array): string {
  if (typeof Buffer !== "undefined") return Buffer.from(data).toString("base64");
  let binary = "";
  for (const byte of data) binary += String.fromCharCode(byte);
  return btoa(binary);
}
