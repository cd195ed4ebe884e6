// Rendering helpers. Geometry arrives from the server as polylines in
// image coordinates; this module only maps it through the view transform
// and draws. Window/level is a display-side CSS filter and never touches
// what the server segments.

import { imageToCanvas, type ViewTransform } from "./transform.js";
import type { WindowLevel } from "./viewstate.js";

/** Map a server polyline (image coords) to canvas vertex positions. */
export function contourToCanvas(
  t: ViewTransform,
  contour: readonly [number, number][],
): [number, number][] {
  return contour.map(([x, y]) => imageToCanvas(t, x, y));
}

/** CSS filter implementing a linear window/level on the displayed slice. */
export function windowLevelFilter(wl: WindowLevel): string {
  const width = Math.max(0.01, wl.width);
  const contrast = 1.0 / width;
  // remap so that `center` lands at mid-gray after the contrast stretch
  const brightness = 0.5 + (0.5 - wl.center) / width;
  return `brightness(${(brightness * 2).toFixed(4)}) contrast(${contrast.toFixed(4)})`;
}

export function drawSlice(
  ctx: CanvasRenderingContext2D | null,
  img: CanvasImageSource,
  imgW: number,
  imgH: number,
  t: ViewTransform,
  wl: WindowLevel,
): void {
  if (!ctx) return;
  ctx.save();
  ctx.imageSmoothingEnabled = t.zoom < 4;
  ctx.filter = windowLevelFilter(wl);
  ctx.drawImage(img, t.panX, t.panY, imgW * t.zoom, imgH * t.zoom);
  ctx.restore();
}

export function drawPolyline(
  ctx: CanvasRenderingContext2D | null,
  pts: readonly [number, number][],
  color = "#ff5c5c",
  lineWidth = 1.5,
): void {
  if (!ctx || pts.length < 2) return;
  ctx.save();
  ctx.strokeStyle = color;
  ctx.lineWidth = lineWidth;
  ctx.beginPath();
  ctx.moveTo(pts[0][0], pts[0][1]);
  for (let i = 1; i < pts.length; i++) {
    ctx.lineTo(pts[i][0], pts[i][1]);
  }
  ctx.stroke();
  ctx.restore();
}

export function drawSeedMarker(
  ctx: CanvasRenderingContext2D | null,
  t: ViewTransform,
  ix: number,
  iy: number,
): void {
  if (!ctx) return;
  const [cx, cy] = imageToCanvas(t, ix, iy);
  ctx.save();
  ctx.strokeStyle = "#ffd94d";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(cx - 6, cy);
  ctx.lineTo(cx + 6, cy);
  ctx.moveTo(cx, cy - 6);
  ctx.lineTo(cx, cy + 6);
  ctx.stroke();
  ctx.restore();
}
