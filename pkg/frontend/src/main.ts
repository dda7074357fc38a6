// Browser wiring: binds the controller to the page. Logic lives in the
// testable modules; this file only moves strings in and out of the DOM.

import { ApiClient } from "./client";
import { bibliographyKeys, renderDraftHtml, renderPanel, statusLabel } from "./render";
import { SessionController } from "./session";

const base = (import.meta as { env?: { VITE_API_BASE?: string } }).env?.VITE_API_BASE
  ?? "http://127.0.0.1:8000";
const client = new ApiClient(base);
const controller = new SessionController(client);

const $ = <T extends HTMLElement>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el;
};

const draftEl = $("#draft");
const panelEl = $("#panel");
const statusEl = $("#status");
const bibEl = $("#bib-preview");

function paint(): void {
  const v = controller.view;
  draftEl.innerHTML = renderDraftHtml(v.segments);
  statusEl.textContent = statusLabel(v.status, v.busyNotice);
  panelEl.hidden = !v.panelVisible;
  if (v.panelVisible && v.candidates) {
    panelEl.innerHTML = renderPanel(v.candidates)
      .map(
        (item, i) => `
        <div class="candidate">
          <strong>${item.title}</strong> <em>${item.score.toFixed(3)}</em>
          <p title="${item.fullAbstract}">${item.snippet}</p>
          <button data-accept="${i}" ${v.actionInFlight ? "disabled" : ""}>accept</button>
        </div>`,
      )
      .join("");
    for (const btn of panelEl.querySelectorAll<HTMLButtonElement>("[data-accept]")) {
      btn.addEventListener("click", () => {
        const idx = Number(btn.dataset.accept);
        const chosen = v.candidates?.[idx];
        if (chosen) void act(() => controller.accept(chosen.ref_id));
      });
    }
  }
}

async function act(fn: () => Promise<void>): Promise<void> {
  await fn();
  paint();
  if (controller.view.status === "generating") {
    await controller.stream();
    paint();
  }
  await refreshBib();
}

async function refreshBib(): Promise<void> {
  const bytes = await controller.exportBytes("bib");
  const text = new TextDecoder().decode(bytes);
  bibEl.textContent = bibliographyKeys(text).join(", ");
}

$("#start").addEventListener("click", () => {
  void (async () => {
    const title = $<HTMLInputElement>("#title").value;
    await controller.create(title);
    await controller.stream();
    paint();
  })();
});
$("#skip").addEventListener("click", () => void act(() => controller.skip()));
$("#cite-here").addEventListener("click", () => void act(() => controller.trigger()));
$("#export-tex").addEventListener("click", () => {
  void download("tex");
});
$("#export-bib").addEventListener("click", () => {
  void download("bib");
});

async function download(format: "tex" | "bib"): Promise<void> {
  // the downloaded file is byte-for-byte the service response body
  const bytes = await controller.exportBytes(format);
  const blob = new Blob([bytes as BlobPart], { type: "text/plain" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = `draft.${format}`;
  a.click();
  URL.revokeObjectURL(a.href);
}
