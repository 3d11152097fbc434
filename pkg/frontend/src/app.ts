/** Browser bootstrap: query-string configured review client.
 *
 *   index.html?server=http://127.0.0.1:8787&token=...&document=<id>[&session=<id>]
 *
 * Without a session id the viewer works against the asynchronous-phase
 * API only (create/browse annotations, no live events).
 */

import { ReviewClient } from "./api.js";
import { connectStream } from "./events.js";
import { SurfaceMesh } from "./mesh.js";
import { AnnotationDraft, draftErrors, submitDraft } from "./pick.js";
import { FilterState } from "./filters.js";
import { Viewer } from "./viewer.js";
import type { Annotation, ForceKind } from "./types.js";

const params = new URLSearchParams(location.search);
const serverUrl = params.get("server") ?? location.origin;
const token = params.get("token") ?? "";
const documentId = params.get("document");
const sessionId = params.get("session");

const canvas = document.getElementById("view") as HTMLCanvasElement;
const formHost = document.getElementById("form")!;
const threadHost = document.getElementById("thread")!;
const noticeHost = document.getElementById("notice")!;

function notice(text: string): void {
  noticeHost.textContent = text;
  if (text) setTimeout(() => (noticeHost.textContent = ""), 2500);
}

async function boot(): Promise<void> {
  if (!documentId || !token) {
    noticeHost.textContent = "missing ?server=&token=&document= parameters";
    return;
  }
  const client = new ReviewClient(serverUrl, token);
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
  const mesh = new SurfaceMesh(await client.getMesh(documentId));
  const viewer = new Viewer(canvas, mesh, {
    onMiss: () => notice("no surface hit"),
    onDraft: (draft) => openDraftForm(draft),
    onSelect: (annotation) => openThreadPanel(annotation),
  });

  viewer.feed.seed(await client.queryAnnotations({}, { document: documentId }));
  viewer.render();
  renderFilterControls(viewer);

  if (sessionId) {
    await client.joinSession(sessionId);
    connectStream({
      baseUrl: serverUrl,
      sessionId,
      token,
      feed: viewer.feed,
      onEvent: () => viewer.render(),
      onReconnect: () => notice("stream lost, resuming"),
    });
  }

  function openDraftForm(draft: AnnotationDraft): void {
    formHost.innerHTML = `
      <label>intention</label>
      <select id="f-kind">
        <option>Proposition</option><option>Clarification</option>
        <option>Evaluation</option><option>Validation</option>
      </select>
      <label>clarifies</label>
      <select id="f-clar"><option value="">-</option><option>Solution</option><option>Problem</option></select>
      <label>polarity</label>
      <select id="f-pol"><option value="">-</option><option>Positive</option><option>Negative</option><option>Neutral</option></select>
      <label>content kind</label>
      <select id="f-content"><option>Constraint</option><option>Action</option><option>Decision</option><option>Other</option></select>
      <label>utterance</label>
      <textarea id="f-text" rows="3"></textarea>
      <label>sphere</label>
      <select id="f-sphere"><option>Public</option><option>Private</option></select>
      <div class="err" id="f-errors"></div>
      <button id="f-submit">annotate</button>`;
    const read = () => {
      draft.force_kind = (formHost.querySelector("#f-kind") as HTMLSelectElement).value as ForceKind;
      const clar = (formHost.querySelector("#f-clar") as HTMLSelectElement).value;
      draft.clarification_kind = clar ? (clar as "Solution" | "Problem") : undefined;
      const pol = (formHost.querySelector("#f-pol") as HTMLSelectElement).value;
      draft.polarity = pol ? (pol as "Positive" | "Negative" | "Neutral") : undefined;
      draft.content_kind = (formHost.querySelector("#f-content") as HTMLSelectElement)
        .value as AnnotationDraft["content_kind"];
      draft.text = (formHost.querySelector("#f-text") as HTMLTextAreaElement).value;
      draft.sphere = (formHost.querySelector("#f-sphere") as HTMLSelectElement).value as
        | "Public"
        | "Private";
    };
    formHost.querySelector("#f-submit")!.addEventListener("click", async () => {
      read();
      const errors = draftErrors(draft);
      if (errors.length > 0) {
        formHost.querySelector("#f-errors")!.textContent = errors.join(", ");
        return; // no request leaves the client
      }
      const body = submitDraft(draft);
      try {
        if (sessionId) await client.sessionCreateAnnotation(sessionId, body);
        else {
          const created = await client.createAnnotation(documentId!, 1, body);
          viewer.feed.seed([created]);
        }
        formHost.innerHTML = "";
        viewer.render();
      } catch (error) {
        formHost.querySelector("#f-errors")!.textContent = String(error);
      }
    });
  }

  function openThreadPanel(annotation: Annotation): void {
    const entries = annotation.thread
      .map((e) => `<p><strong>${e.author}</strong> ${e.text}</p>`)
      .join("");
    threadHost.innerHTML = `
      <h2>${annotation.force.kind}${annotation.orphaned ? " (orphaned)" : ""}</h2>
      <p>${annotation.utterance.text}</p>
      ${entries}
      <textarea id="t-reply" rows="2"></textarea>
      <button id="t-send">reply</button>`;
    threadHost.querySelector("#t-send")!.addEventListener("click", async () => {
      const text = (threadHost.querySelector("#t-reply") as HTMLTextAreaElement).value;
      if (!text.trim()) return;
      if (sessionId) await client.sessionReply(sessionId, annotation.id, text);
      else {
        const updated = await client.reply(annotation.id, text);
        viewer.feed.seed([updated]);
      }
      const fresh = viewer.feed.annotation(annotation.id);
      if (fresh) openThreadPanel(fresh);
    });
  }

  function renderFilterControls(target: Viewer): void {
    const select = document.createElement("select");
    select.innerHTML = `<option value="">all intentions</option>
      <option>Proposition</option><option>Clarification</option>
      <option>Evaluation</option><option>Validation</option>`;
    select.addEventListener("change", () => {
      const filters: FilterState = {};
      if (select.value) filters.force_kind = select.value as ForceKind;
      target.filters = filters;
      target.render();
    });
    formHost.before(select);
  }
}

boot().catch((error) => {
  noticeHost.textContent = String(error);
});
