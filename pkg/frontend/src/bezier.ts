// Client-side quadratic evaluation for the ghost preview drawn while the
// third point is still under the cursor. Display only: the authoritative
// rasterization and damage math happen on the server.

import type { Point } from "./types.js";

export function quadraticPoint(b0: Point, b1: Point, b2: Point, t: number): Point {
  const u = 1 - t;
  return {
    x: u * u * b0.x + 2 * u * t * b1.x + t * t * b2.x,
    y: u * u * b0.y + 2 * u * t * b1.y + t * t * b2.y,
  };
}

export function ghostPolyline(b0: Point, b1: Point, b2: Point, segments = 48): Point[] {
  const pts: Point[] = [];
  for (let i = 0; i <= segments; i++) {
    pts.push(quadraticPoint(b0, b1, b2, i / segments));
  }
  return pts;
}
