/**
 * Screen <-> image coordinate mapping for the zoomable canvas.
 *
 * A transform is uniform scale plus translation, both in CSS pixels:
 * screen = image * scale + offset. All functions are pure; the
 * controller replaces the transform wholesale on zoom/pan.
 */

import type { Point } from "./types.js";

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export const IDENTITY: ViewTransform = { scale: 1, offsetX: 0, offsetY: 0 };

export const MIN_SCALE = 0.05;
export const MAX_SCALE = 64;

/** Letterbox fit: image centered in the viewport, fully visible. */
export function fitImage(
  imageW: number,
  imageH: number,
  viewW: number,
  viewH: number,
): ViewTransform {
  const scale = Math.min(viewW / imageW, viewH / imageH);
  return {
    scale,
    offsetX: (viewW - imageW * scale) / 2,
    offsetY: (viewH - imageH * scale) / 2,
  };
}

export function imageToScreen(t: ViewTransform, p: Point): Point {
  return { x: p.x * t.scale + t.offsetX, y: p.y * t.scale + t.offsetY };
}

export function screenToImage(t: ViewTransform, p: Point): Point {
  return { x: (p.x - t.offsetX) / t.scale, y: (p.y - t.offsetY) / t.scale };
}

/** Zoom by factor keeping the screen-space anchor over the same image point. */
export function zoomAt(t: ViewTransform, anchor: Point, factor: number): ViewTransform {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, t.scale * factor));
  const applied = scale / t.scale;
  return {
    scale,
    offsetX: anchor.x - (anchor.x - t.offsetX) * applied,
    offsetY: anchor.y - (anchor.y - t.offsetY) * applied,
  };
}

export function pan(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}

export function insideImage(p: Point, imageW: number, imageH: number): boolean {
  return p.x >= 0 && p.y >= 0 && p.x < imageW && p.y < imageH;
}
