// Canvas <-> image coordinate mapping. Image coordinates address pixel
// centers (integer (i, j) is the center of pixel (i, j)), canvas
// coordinates are CSS pixels inside the canvas element. The view is a
// uniform zoom plus a pan offset; the round trip must be the identity to
// well under half a pixel at any zoom, since seeds are placed by eye.

export interface ViewTransform {
  zoom: number; // canvas px per image px
  panX: number; // canvas position of image coordinate -0.5 (left pixel edge)
  panY: number;
}

export function imageToCanvas(t: ViewTransform, ix: number, iy: number): [number, number] {
  return [(ix + 0.5) * t.zoom + t.panX, (iy + 0.5) * t.zoom + t.panY];
}

export function canvasToImage(t: ViewTransform, cx: number, cy: number): [number, number] {
  return [(cx - t.panX) / t.zoom - 0.5, (cy - t.panY) / t.zoom - 0.5];
}

export function insideImage(x: number, y: number, width: number, height: number): boolean {
  return x >= 0 && y >= 0 && x <= width - 1 && y <= height - 1;
}

/** Transform that letterboxes a width x height image into a canvas. */
export function fitTransform(
  imgW: number,
  imgH: number,
  canvasW: number,
  canvasH: number,
): ViewTransform {
  const zoom = Math.min(canvasW / imgW, canvasH / imgH);
  return {
    zoom,
    panX: (canvasW - imgW * zoom) / 2,
    panY: (canvasH - imgH * zoom) / 2,
  };
}

export function zoomAround(
  t: ViewTransform,
  factor: number,
  cx: number,
  cy: number,
  minZoom = 0.25,
  maxZoom = 64,
): ViewTransform {
  const zoom = Math.min(maxZoom, Math.max(minZoom, t.zoom * factor));
  const scale = zoom / t.zoom;
  // keep the canvas point (cx, cy) anchored on the same image point
  return {
    zoom,
    panX: cx - (cx - t.panX) * scale,
    panY: cy - (cy - t.panY) * scale,
  };
}

export function pan(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { zoom: t.zoom, panX: t.panX + dx, panY: t.panY + dy };
}
