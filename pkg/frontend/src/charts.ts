/** Dependency-free chart building: pure point builders plus small SVG
 * string renderers, so every pixel-producing step is unit-testable. */

import type { SessionSeries } from "./session.js";
import type { FrontViewModel } from "./front.js";

export interface ChartPoint {
  x: number;
  y: number;
}

export function linePoints(periods: number[], values: number[]): ChartPoint[] {
  return periods.map((p, i) => ({ x: p, y: values[i] ?? 0 }));
}

export interface LineChartSpec {
  title: string;
  points: ChartPoint[];
  /** vertical markers (e.g. command-effect periods) */
  markers?: number[];
  width?: number;
  height?: number;
}

function scale(domain: [number, number], range: [number, number]): (v: number) => number {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  return (v) => (span === 0 ? (r0 + r1) / 2 : r0 + ((v - d0) / span) * (r1 - r0));
}

export function renderLineChart(spec: LineChartSpec): string {
  const w = spec.width ?? 640;
  const h = spec.height ?? 160;
  const pad = 28;
  const pts = spec.points;
  if (pts.length === 0) {
    return (
      `<svg class="chart" viewBox="0 0 ${w} ${h}" xmlns="http://www.w3.org/2000/svg">` +
      `<text x="${w / 2}" y="${h / 2}" text-anchor="middle" class="empty">no data yet</text></svg>`
    );
  }
  const xs = pts.map((p) => p.x);
  const ys = pts.map((p) => p.y);
  const sx = scale([Math.min(...xs), Math.max(...xs)], [pad, w - pad]);
  const sy = scale([Math.min(...ys), Math.max(...ys)], [h - pad, pad]);
  const path = pts.map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`).join(" ");
  const markers = (spec.markers ?? [])
    .map((m) => `<line class="marker" x1="${sx(m).toFixed(1)}" y1="${pad}" x2="${sx(m).toFixed(1)}" y2="${h - pad}"/>`)
    .join("");
  const last = pts[pts.length - 1]!;
  return (
    `<svg class="chart" viewBox="0 0 ${w} ${h}" xmlns="http://www.w3.org/2000/svg">` +
    `<title>${spec.title}</title>` +
    markers +
    `<path class="series" d="${path}" fill="none"/>` +
    `<circle class="head" cx="${sx(last.x).toFixed(1)}" cy="${sy(last.y).toFixed(1)}" r="3"/>` +
    `</svg>`
  );
}

export interface SessionCharts {
  profit: ChartPoint[];
  emissions: ChartPoint[];
  leadTime: ChartPoint[];
}

export function sessionCharts(series: SessionSeries): SessionCharts {
  return {
    profit: linePoints(series.periods, series.profitCum),
    emissions: linePoints(series.periods, series.emissionsCum),
    leadTime: linePoints(series.periods, series.leadTime),
  };
}

/** One 2-D scatter panel of the front (objective j vs objective k). */
export function renderScatterPanel(
  vm: FrontViewModel,
  xObjective: number,
  yObjective: number,
  size = 180,
): string {
  const pad = 24;
  const marks = vm.policies
    .map((p) => {
      const x = pad + (p.normalized[xObjective] ?? 0) * (size - 2 * pad);
      const y = size - pad - (p.normalized[yObjective] ?? 0) * (size - 2 * pad);
      const cls = p.selected ? "mark selected" : "mark";
      return `<circle class="${cls}" data-policy="${p.id}" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="${p.selected ? 6 : 4}"/>`;
    })
    .join("");
  const xName = vm.objectives[xObjective] ?? "";
  const yName = vm.objectives[yObjective] ?? "";
  return (
    `<svg class="scatter" viewBox="0 0 ${size} ${size}" xmlns="http://www.w3.org/2000/svg">` +
    `<text class="axis" x="${size / 2}" y="${size - 4}" text-anchor="middle">${xName}</text>` +
    `<text class="axis" x="8" y="${size / 2}" transform="rotate(-90 8 ${size / 2})" text-anchor="middle">${yName}</text>` +
    marks +
    `</svg>`
  );
}

/** Parallel-coordinates panel across all objectives. */
export function renderParallelCoordinates(vm: FrontViewModel, width = 420, height = 180): string {
  const pad = 24;
  const nAxes = vm.objectives.length;
  const axisX = (j: number) => pad + (j / Math.max(nAxes - 1, 1)) * (width - 2 * pad);
  const axes = vm.objectives
    .map((name, j) =>
      `<line class="axis" x1="${axisX(j)}" y1="${pad}" x2="${axisX(j)}" y2="${height - pad}"/>` +
      `<text class="axis" x="${axisX(j)}" y="${height - 6}" text-anchor="middle">${name}</text>`)
    .join("");
  const lines = vm.policies
    .map((p) => {
      const d = p.normalized
        .map((v, j) => `${j === 0 ? "M" : "L"}${axisX(j).toFixed(1)},${(height - pad - v * (height - 2 * pad)).toFixed(1)}`)
        .join(" ");
      const cls = p.selected ? "pc selected" : "pc";
      return `<path class="${cls}" data-policy="${p.id}" d="${d}" fill="none"/>`;
    })
    .join("");
  return `<svg class="parallel" viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">${axes}${lines}</svg>`;
}
