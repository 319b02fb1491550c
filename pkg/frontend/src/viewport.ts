/**
 * Zoom/pan mapping between canvas (screen) coordinates and image pixels.
 *
 * Screen x runs along image columns, screen y along rows. The bitmap is
 * drawn with its top-left corner at (panX, panY), so pixel (r, c) covers
 * the square [c*z+panX, (c+1)*z+panX) x [r*z+panY, (r+1)*z+panY).
 * Integer pixel coordinates refer to square CENTERS, which makes
 * round-to-nearest-pixel agree with the square under the cursor.
 */

export interface Viewport {
  zoom: number;
  panX: number;
  panY: number;
}

export function identityViewport(): Viewport {
  return { zoom: 1, panX: 0, panY: 0 };
}

export function imageToScreen(v: Viewport, row: number, col: number): { x: number; y: number } {
  return { x: (col + 0.5) * v.zoom + v.panX, y: (row + 0.5) * v.zoom + v.panY };
}

export function screenToImage(v: Viewport, x: number, y: number): { row: number; col: number } {
  return { row: (y - v.panY) / v.zoom - 0.5, col: (x - v.panX) / v.zoom - 0.5 };
}

/** Nearest integer pixel under a screen position, or null when outside. */
export function screenToPixel(
  v: Viewport,
  x: number,
  y: number,
  height: number,
  width: number
): { row: number; col: number } | null {
  const { row, col } = screenToImage(v, x, y);
  const r = Math.round(row);
  const c = Math.round(col);
  if (r < 0 || r >= height || c < 0 || c >= width) {
    return null;
  }
  return { row: r, col: c };
}

/** Zoom about a screen anchor so the image point under it stays put. */
export function zoomAt(v: Viewport, anchorX: number, anchorY: number, factor: number): Viewport {
  const zoom = Math.min(32, Math.max(0.25, v.zoom * factor));
  const scale = zoom / v.zoom;
  return {
    zoom,
    panX: anchorX - (anchorX - v.panX) * scale,
    panY: anchorY - (anchorY - v.panY) * scale,
  };
}

export function panBy(v: Viewport, dx: number, dy: number): Viewport {
  return { zoom: v.zoom, panX: v.panX + dx, panY: v.panY + dy };
}
