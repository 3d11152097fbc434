/** Live session state: an event-sourced reducer plus the NDJSON stream
 * client that feeds it.
 *
 * Events are applied strictly in sequence order and duplicates are
 * dropped, so redelivery after a reconnect is harmless. Reconnection
 * resumes from the last applied sequence number.
 */

import type { Annotation, SessionEvent, ThreadEntry, Viewpoint } from "./types.js";

export class SessionFeed {
  lastSeq = 0;
  closed = false;
  minuteId: string | null = null;
  followPresenter = false;
  /** camera adopted when following the presenter */
  camera: Viewpoint | null = null;
  presenterViewpoint: Viewpoint | null = null;
  redactedEvents = 0;
  participants = new Map<string, string>();
  private readonly byId = new Map<string, Annotation>();

  annotations(): Annotation[] {
    return [...this.byId.values()];
  }

  annotation(id: string): Annotation | undefined {
    return this.byId.get(id);
  }

  /** Seed the feed with a queried annotation list (pre-session state). */
  seed(annotations: Annotation[]): void {
    for (const annotation of annotations) this.byId.set(annotation.id, annotation);
  }

  /** Apply one event; returns false for duplicates (idempotent). */
  apply(event: SessionEvent): boolean {
    if (event.seq <= this.lastSeq) return false;
    this.lastSeq = event.seq;
    const payload = event.payload;
    if (payload["redacted"] === true) {
      this.redactedEvents += 1;
      return true;
    }
    switch (event.kind) {
      case "Joined":
        this.participants.set(String(payload["participant"]), String(payload["role"]));
        break;
      case "Left":
        this.participants.delete(String(payload["participant"]));
        break;
      case "AnnotationCreated": {
        const annotation = payload["annotation"] as Annotation;
        this.byId.set(annotation.id, annotation);
        break;
      }
      case "ReplyAdded": {
        const id = String(payload["annotation_id"]);
        const existing = this.byId.get(id);
        if (existing) {
          const entry = payload["entry"] as ThreadEntry;
          existing.thread = [...existing.thread, entry];
        }
        break;
      }
      case "StatusChanged": {
        const existing = this.byId.get(String(payload["annotation_id"]));
        if (existing) existing.status = payload["to_status"] as Annotation["status"];
        break;
      }
      case "ViewpointShared": {
        const viewpoint: Viewpoint = {
          position: payload["position"] as [number, number, number],
          target: payload["target"] as [number, number, number],
          up: payload["up"] as [number, number, number],
        };
        this.presenterViewpoint = viewpoint;
        if (this.followPresenter) this.camera = viewpoint;
        break;
      }
      case "SessionClosed":
        this.closed = true;
        this.minuteId = (payload["minute_id"] as string) ?? null;
        break;
    }
    return true;
  }

  /** Accept the presenter's current viewpoint and keep following. */
  follow(): void {
    this.followPresenter = true;
    if (this.presenterViewpoint) this.camera = this.presenterViewpoint;
  }

  unfollow(): void {
    this.followPresenter = false;
  }
}

export interface StreamHandle {
  stop(): void;
  done: Promise<void>;
}

export interface StreamOptions {
  baseUrl: string;
  sessionId: string;
  token: string;
  feed: SessionFeed;
  onEvent?: (event: SessionEvent) => void;
  /** called when the connection drops and a resume is about to start */
  onReconnect?: (fromSeq: number) => void;
  fetchImpl?: typeof fetch;
  reconnectDelayMs?: number;
  maxAttempts?: number;
}

/** Consume the session's NDJSON stream, resuming from the feed's last
 * applied seq after any interruption. Resolves once the session closes,
 * stop() is called, or the attempt budget runs out. */
export function connectStream(options: StreamOptions): StreamHandle {
  const fetchImpl = options.fetchImpl ?? fetch;
  const delay = options.reconnectDelayMs ?? 1000;
  const maxAttempts = options.maxAttempts ?? Number.POSITIVE_INFINITY;
  let stopped = false;
  let controller = new AbortController();

  const done = (async () => {
    let attempts = 0;
    while (!stopped && !options.feed.closed && attempts < maxAttempts) {
      attempts += 1;
      const after = options.feed.lastSeq;
      if (attempts > 1) options.onReconnect?.(after);
      try {
        const response = await fetchImpl(
          `${options.baseUrl}/sessions/${options.sessionId}/stream?after=${after}`,
          {
            headers: { Authorization: `Bearer ${options.token}` },
            signal: controller.signal,
          },
        );
        if (!response.ok || !response.body) throw new Error(`stream HTTP ${response.status}`);
        await readLines(response.body, (line) => {
          const event = JSON.parse(line) as SessionEvent;
          if (options.feed.apply(event)) options.onEvent?.(event);
        });
      } catch {
        if (stopped) break;
      }
      if (options.feed.closed || stopped) break;
      await sleep(delay);
      controller = new AbortController();
    }
  })();

  return {
    stop() {
      stopped = true;
      controller.abort();
    },
    done,
  };
}

async function readLines(
  body: ReadableStream<Uint8Array>,
  onLine: (line: string) => void,
): Promise<void> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let newline;
    while ((newline = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, newline).trim();
      buffer = buffer.slice(newline + 1);
      if (line !== "") onLine(line); // blank lines are keepalives
    }
  }
  const tail = buffer.trim();
  if (tail !== "") onLine(tail);
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
