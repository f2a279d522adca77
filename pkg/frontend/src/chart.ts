/** Inline SVG for the valence trajectory.  The y axis is pinned to the
 *  coordinate definition's [-1, 1] range regardless of the data, so two
 *  charts are visually comparable; x spreads the points evenly. */

import type { TraceView } from "./viewmodel.js";

export const CHART_W = 320;
export const CHART_H = 200;
const PAD = 24;

export function xAt(index: number, count: number): number {
  if (count === 1) return CHART_W / 2;
  return PAD + (index * (CHART_W - 2 * PAD)) / (count - 1);
}

export function yAt(valence: number): number {
  return CHART_H - PAD - ((valence + 1) / 2) * (CHART_H - 2 * PAD);
}

export function traceChartSvg(view: TraceView): string {
  const n = view.markerCount;
  const coords = view.points.map((v, i) => [xAt(i, n), yAt(v)] as const);
  const markers = coords
    .map(
      ([x, y], i) =>
        `<circle class="trace-marker" cx="${x}" cy="${y}" r="3">` +
        `<title>${view.points[i]}</title></circle>`,
    )
    .join("");
  const line =
    n > 1
      ? `<polyline class="trace-line" fill="none" points="${coords
          .map(([x, y]) => `${x},${y}`)
          .join(" ")}"/>`
      : "";
  const zeroY = yAt(0);
  return (
    `<svg viewBox="0 0 ${CHART_W} ${CHART_H}" xmlns="http://www.w3.org/2000/svg">` +
    `<line class="axis" x1="${PAD}" y1="${zeroY}" x2="${CHART_W - PAD}" y2="${zeroY}"/>` +
    `<line class="axis" x1="${PAD}" y1="${yAt(1)}" x2="${PAD}" y2="${yAt(-1)}"/>` +
    line +
    markers +
    `<text class="delta-label" x="${CHART_W - PAD}" y="${PAD - 8}" text-anchor="end">` +
    `delta ${view.deltaDisplay}<title>${view.deltaFull}</title></text>` +
    `</svg>`
  );
}
