// DOM wiring for the annotator: canvas viewer, keyboard navigation, seed
// clicks, accept/report actions. All segmentation math happens server-side.

import { ApiClient } from "./api.js";
import { acceptCurrent, autoSegment, seedAtCanvasPoint } from "./controller.js";
import { contourToCanvas, drawPolyline, drawSeedMarker, drawSlice } from "./overlay.js";
import { buildReportView, formatMm3, panelFromError, type PanelView } from "./report.js";
import { fitTransform, pan, zoomAround } from "./transform.js";
import { ViewState } from "./viewstate.js";

const api = new ApiClient("");
const state = new ViewState();

const canvas = document.getElementById("viewer") as HTMLCanvasElement;
const ctx = canvas.getContext("2d");
const statusEl = document.getElementById("status")!;
const messageEl = document.getElementById("message")!;
const energyEl = document.getElementById("energy")!;
const panelEl = document.getElementById("report-panel")!;
const studySelect = document.getElementById("study-select") as HTMLSelectElement;

let sliceImage: HTMLImageElement | null = null;
let lastSeed: [number, number] | null = null;

function message(text: string, kind: "info" | "error" = "info"): void {
  messageEl.textContent = text;
  messageEl.className = kind;
}

function render(): void {
  if (!ctx || !state.study) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (sliceImage) {
    drawSlice(ctx, sliceImage, state.study.width, state.study.height,
              state.transform, state.windowLevel);
  }
  const res = state.currentResult();
  if (res?.contour && state.overlayVisible) {
    drawPolyline(ctx, contourToCanvas(state.transform, res.contour));
  }
  if (lastSeed && state.overlayVisible) {
    drawSeedMarker(ctx, state.transform, lastSeed[0], lastSeed[1]);
  }
  const kind = state.phase === state.study.ed_phase ? "ED"
    : state.phase === state.study.es_phase ? "ES" : "";
  const accept = state.acceptStatus(state.z, state.phase);
  statusEl.textContent =
    `${state.study.id}  z ${state.z + 1}/${state.study.n_z}  ` +
    `phase ${state.phase + 1}/${state.study.n_phase} ${kind}  [${accept}]`;
  energyEl.textContent = res?.energy != null
    ? `E = ${res.energy.toFixed(3)}${res.weak ? " (weak)" : ""}  ` +
      `a=${res.params?.a.toFixed(1)} b=${res.params?.b.toFixed(1)}`
    : "";
}

async function loadSlice(): Promise<void> {
  if (!state.study) return;
  const img = new Image();
  img.src = api.imageUrl(state.study.id, state.z, state.phase) + `?t=${Date.now()}`;
  await img.decode().catch(() => undefined);
  sliceImage = img;
  lastSeed = null;
  const meta = await api.sliceMeta(state.study.id, state.z, state.phase);
  if (meta.result) state.applyResult(meta.result);
  render();
}

function renderPanel(view: PanelView): void {
  if (view.kind === "missing") {
    panelEl.innerHTML = `<h3>Report unavailable</h3><p>slices without an accepted result:</p>` +
      `<div class="grid">` +
      view.missing.map(([z, k]) => `<span class="miss">z${z + 1} ${k}</span>`).join("") +
      `</div>`;
    return;
  }
  if (view.kind === "error") {
    panelEl.innerHTML = `<h3>Report error</h3><p>${view.message}</p>`;
    return;
  }
  const rows = view.rows.map((r) =>
    `<span class="${r.status === "ok" ? "ok" : "miss"}">z${r.z + 1} ${r.kind}` +
    `${r.dice != null ? ` ${r.dice.toFixed(2)}` : ""}</span>`).join("");
  panelEl.innerHTML =
    `<h3>Ejection fraction</h3>` +
    `<p class="ef">${view.efPercent?.toFixed(2) ?? "n/a"} %</p>` +
    `<p>EDV ${formatMm3(view.edv)} &middot; ESV ${formatMm3(view.esv)}</p>` +
    (view.efOkOnly != null ? `<p>clean-slices-only EF ${view.efOkOnly.toFixed(2)} %</p>` : "") +
    (view.truthEf != null
      ? `<p>ground truth EF ${view.truthEf.toFixed(2)} % (|err| ${view.efError?.toFixed(2)})</p>` : "") +
    (view.pooledDice != null ? `<p>pooled Dice ${view.pooledDice.toFixed(3)}</p>` : "") +
    view.flags.map((f) => `<p class="warn">${f}</p>`).join("") +
    `<div class="grid">${rows}</div>`;
}

function canvasPoint(e: MouseEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [e.clientX - rect.left, e.clientY - rect.top];
}

canvas.addEventListener("click", async (e) => {
  const [cx, cy] = canvasPoint(e);
  message("fitting…");
  const out = await seedAtCanvasPoint(state, api, cx, cy);
  if (out.kind === "result") {
    lastSeed = [out.imageX, out.imageY];
    message(out.result.status === "ok" ? "" : out.result.status, "info");
  } else if (out.kind !== "busy") {
    message(out.message ?? "", "error");
  }
  render();
});

canvas.addEventListener("wheel", (e) => {
  e.preventDefault();
  const [cx, cy] = canvasPoint(e as MouseEvent);
  state.transform = zoomAround(state.transform, e.deltaY < 0 ? 1.25 : 0.8, cx, cy);
  render();
});

let dragging: [number, number] | null = null;
canvas.addEventListener("mousedown", (e) => {
  if (e.buttons === 2 || e.shiftKey) dragging = [e.clientX, e.clientY];
});
window.addEventListener("mousemove", (e) => {
  if (!dragging) return;
  state.transform = pan(state.transform, e.clientX - dragging[0], e.clientY - dragging[1]);
  dragging = [e.clientX, e.clientY];
  render();
});
window.addEventListener("mouseup", () => (dragging = null));
canvas.addEventListener("contextmenu", (e) => e.preventDefault());

window.addEventListener("keydown", async (e) => {
  if (!state.study) return;
  switch (e.key) {
    case "ArrowUp":
    case "ArrowDown": {
      const dz = e.key === "ArrowUp" ? 1 : -1;
      if (state.atZEdge(dz)) message("at the last slice", "info");
      if (state.navigate(dz, 0)) await loadSlice();
      break;
    }
    case "ArrowLeft":
    case "ArrowRight": {
      if (state.navigate(0, e.key === "ArrowRight" ? 1 : -1)) await loadSlice();
      break;
    }
    case "a": {
      const out = await acceptCurrent(state, api, true);
      message(out.kind === "result" ? "accepted" : out.kind === "error" ? out.message : "", "info");
      render();
      break;
    }
    case "s": {
      message("auto-segmenting…");
      const out = await autoSegment(state, api);
      message(out.kind === "error" ? out.message : "", out.kind === "error" ? "error" : "info");
      render();
      break;
    }
    case "r":
      await showReport();
      break;
    case "o":
      state.overlayVisible = !state.overlayVisible;
      render();
      break;
  }
});

async function showReport(): Promise<void> {
  if (!state.study) return;
  try {
    renderPanel(buildReportView(await api.report(state.study.id)));
  } catch (err) {
    renderPanel(panelFromError(err));
  }
}

document.getElementById("btn-report")?.addEventListener("click", showReport);
document.getElementById("btn-accept")?.addEventListener("click", async () => {
  await acceptCurrent(state, api, true);
  render();
});

const wlCenter = document.getElementById("wl-center") as HTMLInputElement | null;
const wlWidth = document.getElementById("wl-width") as HTMLInputElement | null;
for (const el of [wlCenter, wlWidth]) {
  el?.addEventListener("input", () => {
    state.windowLevel = {
      center: Number(wlCenter?.value ?? 0.5),
      width: Number(wlWidth?.value ?? 1.0),
    };
    render();
  });
}

async function boot(): Promise<void> {
  const studies = await api.studies();
  if (!studies.length) {
    message("no studies loaded on the server", "error");
    return;
  }
  for (const s of studies) {
    const opt = document.createElement("option");
    opt.value = s.id;
    opt.textContent = `${s.id} (${s.n_z}z × ${s.n_phase}t)`;
    studySelect.appendChild(opt);
  }
  studySelect.addEventListener("change", async () => {
    const chosen = studies.find((s) => s.id === studySelect.value);
    if (chosen) {
      state.setStudy(chosen);
      state.transform = fitTransform(chosen.width, chosen.height, canvas.width, canvas.height);
      await loadSlice();
    }
  });
  state.setStudy(studies[0]);
  state.transform = fitTransform(studies[0].width, studies[0].height, canvas.width, canvas.height);
  await loadSlice();
  message("click the blood pool to seed · arrows navigate · a accept · s auto · r report · o overlay");
}

boot().catch((err) => message(String(err), "error"));
