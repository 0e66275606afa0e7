// SVG line chart of per-iteration F1, one series per class. The values are
// plotted exactly as the API reports them; the y axis is the fixed [0, 1]
// range an F1 score lives in.

import type { MetricsRow } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export type SeriesPoint = { iteration: number; f1: number };

export function f1Series(rows: MetricsRow[], cls: "mental" | "physical"): SeriesPoint[] {
  const points: SeriesPoint[] = [];
  for (const row of rows) {
    const scores = row[cls];
    if (scores !== null) points.push({ iteration: row.iteration, f1: scores.f1 });
  }
  return points;
}

type Layout = {
  width: number;
  height: number;
  pad: number;
};

function xFor(iteration: number, first: number, last: number, layout: Layout): number {
  const span = Math.max(1, last - first);
  return layout.pad + ((iteration - first) / span) * (layout.width - 2 * layout.pad);
}

function yFor(f1: number, layout: Layout): number {
  return layout.height - layout.pad - f1 * (layout.height - 2 * layout.pad);
}

function drawSeries(
  svg: SVGSVGElement,
  cls: "mental" | "physical",
  points: SeriesPoint[],
  first: number,
  last: number,
  layout: Layout,
): void {
  const doc = svg.ownerDocument;
  const line = doc.createElementNS(SVG_NS, "polyline");
  line.setAttribute("data-series", cls);
  line.setAttribute("class", `series-line series-${cls}`);
  line.setAttribute("fill", "none");
  line.setAttribute(
    "points",
    points.map((p) => `${xFor(p.iteration, first, last, layout)},${yFor(p.f1, layout)}`).join(" "),
  );
  svg.appendChild(line);
  for (const p of points) {
    const dot = doc.createElementNS(SVG_NS, "circle");
    dot.setAttribute("data-series", cls);
    dot.setAttribute("class", `series-dot series-${cls}`);
    dot.setAttribute("cx", String(xFor(p.iteration, first, last, layout)));
    dot.setAttribute("cy", String(yFor(p.f1, layout)));
    dot.setAttribute("r", "3");
    svg.appendChild(dot);
  }
}

export function renderChart(
  doc: Document,
  rows: MetricsRow[],
  width = 420,
  height = 150,
): SVGSVGElement {
  const layout: Layout = { width, height, pad: 12 };
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "f1-chart");
  svg.setAttribute("role", "img");

  const frame = doc.createElementNS(SVG_NS, "rect");
  frame.setAttribute("x", String(layout.pad));
  frame.setAttribute("y", String(layout.pad));
  frame.setAttribute("width", String(width - 2 * layout.pad));
  frame.setAttribute("height", String(height - 2 * layout.pad));
  frame.setAttribute("class", "chart-frame");
  frame.setAttribute("fill", "none");
  svg.appendChild(frame);

  const iterations = rows.map((r) => r.iteration);
  const first = iterations.length ? Math.min(...iterations) : 0;
  const last = iterations.length ? Math.max(...iterations) : 0;
  drawSeries(svg, "mental", f1Series(rows, "mental"), first, last, layout);
  drawSeries(svg, "physical", f1Series(rows, "physical"), first, last, layout);
  return svg;
}
