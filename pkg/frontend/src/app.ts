/**
 * DOM wiring for index.html. Everything interesting lives in
 * SessionController; this file just paints state onto the canvas and
 * forwards input events.
 */

import { ApiClient } from "./api.js";
import { SessionController } from "./state.js";
import { imageToScreen, zoomAt, pan } from "./transform.js";
import type { Layer, Point } from "./types.js";

const API_BASE =
  (window as Window & { __leafbiteApiBase?: string }).__leafbiteApiBase ?? "http://127.0.0.1:8000";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("view");
const ctx = canvas.getContext("2d")!;
const fileInput = el<HTMLInputElement>("file");
const thresholdSlider = el<HTMLInputElement>("threshold");
const thresholdTicks = el<HTMLElement>("threshold-ticks");
const minSizeInput = el<HTMLInputElement>("min-size");
const curveList = el<HTMLUListElement>("curves");
const readoutBox = el<HTMLElement>("readout");
const bannerBox = el<HTMLElement>("banner");
const errorBox = el<HTMLElement>("inline-error");

const api = new ApiClient(API_BASE);
const controller = new SessionController(api);

let previewImg: HTMLImageElement | null = null;
let previewKey = "";
let mouse: Point | null = null;
let dragging = false;
let dragLast: Point | null = null;

function canvasPoint(ev: MouseEvent): Point {
  const rect = canvas.getBoundingClientRect();
  return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
}

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  const type = file.type === "image/tiff" ? "image/tiff" : "image/png";
  await controller.open(await file.arrayBuffer(), type).catch(() => {});
});

for (const layer of ["original", "mask", "annotated"] as Layer[]) {
  el<HTMLButtonElement>(`layer-${layer}`).addEventListener("click", () => controller.setLayer(layer));
}

thresholdSlider.addEventListener("input", () => {
  controller.setThreshold(Number(thresholdSlider.value));
});
minSizeInput.addEventListener("change", () => {
  const v = minSizeInput.value.trim();
  controller.setMinSize(v === "" ? null : Number(v));
});

canvas.addEventListener("click", (ev) => {
  if (dragging) return;
  controller.placeControlPoint(canvasPoint(ev));
});
canvas.addEventListener("mousemove", (ev) => {
  mouse = canvasPoint(ev);
  if (dragLast && (ev.buttons & 1) !== 0) {
    const p = canvasPoint(ev);
    const dx = p.x - dragLast.x;
    const dy = p.y - dragLast.y;
    if (dragging || Math.hypot(dx, dy) > 3) {
      dragging = true;
      controller.setTransform(pan(controller.state.transform, dx, dy));
      dragLast = p;
    }
  }
  draw();
});
canvas.addEventListener("mousedown", (ev) => {
  dragLast = canvasPoint(ev);
  dragging = false;
});
canvas.addEventListener("mouseup", () => {
  dragLast = null;
  setTimeout(() => (dragging = false), 0);
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const factor = ev.deltaY < 0 ? 1.2 : 1 / 1.2;
  controller.setTransform(zoomAt(controller.state.transform, canvasPoint(ev), factor));
  draw();
});

function refreshPreview(): void {
  const s = controller.state;
  if (!s.session || !s.result || (s.layer !== "original" && s.result.needs_threshold)) {
    previewImg = null;
    previewKey = "";
    return;
  }
  const key = `${s.session}/${s.layer}@${s.result.revision}`;
  if (key === previewKey) return;
  previewKey = key;
  const img = new Image();
  img.crossOrigin = "anonymous";
  img.onload = () => {
    previewImg = img;
    if (s.imageWidth === 0) {
      controller.setImageSize(img.naturalWidth, img.naturalHeight, canvas.width, canvas.height);
    }
    draw();
  };
  img.src = api.previewUrl(s.session, s.layer, s.result.revision);
}

function drawMarker(p: Point, color: string): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(p.x, p.y, 5, 0, Math.PI * 2);
  ctx.stroke();
}

function draw(): void {
  const s = controller.state;
  ctx.fillStyle = "#202228";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  if (previewImg) {
    const t = s.transform;
    ctx.imageSmoothingEnabled = t.scale < 1;
    ctx.drawImage(
      previewImg,
      t.offsetX,
      t.offsetY,
      previewImg.naturalWidth * t.scale,
      previewImg.naturalHeight * t.scale,
    );
  }

  for (const p of s.pending) {
    drawMarker(imageToScreen(s.transform, p), "#4da3ff");
  }

  if (mouse && s.pending.length === 2) {
    const ghost = controller.ghost(mouse);
    if (ghost && ghost.length > 1) {
      ctx.strokeStyle = "rgba(77, 163, 255, 0.7)";
      ctx.setLineDash([6, 4]);
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      const first = imageToScreen(s.transform, ghost[0]!);
      ctx.moveTo(first.x, first.y);
      for (const gp of ghost.slice(1)) {
        const q = imageToScreen(s.transform, gp);
        ctx.lineTo(q.x, q.y);
      }
      ctx.stroke();
      ctx.setLineDash([]);
    }
  }

  if (s.nudge) {
    drawMarker(s.nudge, "#ffb020");
  }
  if (s.rejection) {
    drawMarker(s.rejection.at, "#ff5964");
    ctx.fillStyle = "#ff5964";
    ctx.font = "12px system-ui, sans-serif";
    ctx.fillText(s.rejection.reason, s.rejection.at.x + 10, s.rejection.at.y - 8);
  }
}

function renderPanels(): void {
  const s = controller.state;
  const readout = controller.readout();

  bannerBox.textContent = s.banner ?? "";
  bannerBox.style.display = s.banner ? "block" : "none";
  errorBox.textContent = s.inlineError ?? "";

  const disabled = controller.controlsDisabled();
  thresholdSlider.disabled = disabled;
  minSizeInput.disabled = disabled;

  if (readout) {
    const pct = (readout.ratio * 100).toFixed(2);
    const cm2 = readout.damageCm2 !== null ? ` (${readout.damageCm2.toFixed(3)} cm²)` : "";
    readoutBox.textContent =
      `damage ${pct}%: internal ${readout.internalPx} px, ` +
      `border ${readout.borderPx} px, leaf total ${readout.totalPx} px${cm2} ` +
      `[threshold ${readout.threshold}, rev ${readout.revision}]`;
    thresholdSlider.value = String(readout.threshold);
    // marked tick at the automatic threshold
    thresholdTicks.innerHTML =
      readout.autoThreshold !== null ? `<option value="${readout.autoThreshold}"></option>` : "";
  } else if (s.result?.needs_threshold) {
    readoutBox.textContent = "automatic threshold failed: set one with the slider";
  } else {
    readoutBox.textContent = "no image loaded";
  }

  curveList.innerHTML = "";
  s.curves.forEach((curve, i) => {
    const li = document.createElement("li");
    const badge = document.createElement("span");
    badge.className = `badge badge-${curve.status}`;
    badge.textContent = curve.status;
    li.appendChild(badge);
    const label = document.createElement("span");
    label.textContent =
      curve.status === "accepted"
        ? ` curve ${i}: ${curve.border_damage_px} px`
        : ` curve ${i}: ${curve.reason ?? ""}`;
    li.appendChild(label);
    const del = document.createElement("button");
    del.textContent = "remove";
    del.addEventListener("click", () => controller.removeCurve(i));
    li.appendChild(del);
    curveList.appendChild(li);
  });
}

controller.subscribe(() => {
  refreshPreview();
  renderPanels();
  draw();
});

renderPanels();
draw();
