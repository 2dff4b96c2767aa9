/**
 * Regret-versus-round figures from summary CSVs.
 *
 * Each input CSV becomes one mean-regret curve with a shaded ±half-width
 * band. Rendering is server-side SVG with a fixed style and no timestamps,
 * so the output is a pure function of the inputs.
 */

import { writeFileSync } from "node:fs";

import * as echarts from "echarts";

import { readSummary, type RegretSummary } from "./csv.js";

/** One input curve: a summary CSV path and its legend label. */
export interface CurveInput {
  path: string;
  label: string;
}

/** Everything needed to produce one figure. */
export interface PlotSpec {
  inputs: CurveInput[];
  /** Output path; must end in .svg (the renderer emits vector output). */
  output: string;
  /** Use a logarithmic round axis (default: linear). */
  logX?: boolean;
  title?: string;
  width?: number;
  height?: number;
}

/** Fixed palette so figures do not depend on library theme defaults. */
export const PALETTE = [
  "#4e79a7",
  "#e15759",
  "#59a14f",
  "#f28e2b",
  "#b07aa1",
  "#76b7b2",
  "#edc948",
  "#9c755f",
] as const;

export interface LabeledSummary {
  label: string;
  summary: RegretSummary;
}

/**
 * The renderer names CSS classes and clip paths after a process-global
 * instance counter (zr0-cls-3, zr1-c0, ...). Renumber them in order of
 * first appearance so the same inputs give the same bytes no matter how
 * many charts the process has rendered before.
 */
function canonicalizeIds(svg: string): string {
  const renamed = new Map<string, string>();
  return svg.replace(/zr\d+-([A-Za-z]+)-?\d+/g, (token, kind: string) => {
    let name = renamed.get(token);
    if (name === undefined) {
      name = `zr-${kind}-${renamed.size}`;
      renamed.set(token, name);
    }
    return name;
  });
}

function bandSeries(curve: LabeledSummary, color: string): object[] {
  const { rounds, meanRegret, halfWidth } = curve.summary;
  // Regret is nonnegative, so clamp the band floor at zero; the band top
  // stays at mean + half-width by stacking the difference on the floor.
  const floor = meanRegret.map((m, i) => Math.max(0, m - (halfWidth[i] ?? 0)));
  const thickness = meanRegret.map(
    (m, i) => m + (halfWidth[i] ?? 0) - (floor[i] ?? 0),
  );
  const stack = `band:${curve.label}`;
  const invisible = { width: 0, opacity: 0 };
  return [
    {
      type: "line",
      stack,
      silent: true,
      showSymbol: false,
      lineStyle: invisible,
      emphasis: { disabled: true },
      tooltip: { show: false },
      data: rounds.map((r, i) => [r, floor[i]]),
    },
    {
      type: "line",
      stack,
      silent: true,
      showSymbol: false,
      lineStyle: invisible,
      emphasis: { disabled: true },
      tooltip: { show: false },
      areaStyle: { color, opacity: 0.22 },
      data: rounds.map((r, i) => [r, thickness[i]]),
    },
  ];
}

function meanSeries(curve: LabeledSummary, color: string): object {
  const { rounds, meanRegret } = curve.summary;
  return {
    name: curve.label,
    type: "line",
    showSymbol: false,
    lineStyle: { width: 2 },
    itemStyle: { color },
    data: rounds.map((r, i) => [r, meanRegret[i]]),
  };
}

/** Render labeled summaries to an SVG string (exposed for tests). */
export function renderRegretSvg(
  curves: LabeledSummary[],
  options: { logX?: boolean; title?: string; width?: number; height?: number } = {},
): string {
  if (curves.length === 0) {
    throw new Error("nothing to plot: no input curves");
  }
  const width = options.width ?? 900;
  const height = options.height ?? 540;
  const series = curves.flatMap((curve, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    return [...bandSeries(curve, color), meanSeries(curve, color)];
  });
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width,
    height,
  });
  chart.setOption({
    animation: false,
    color: [...PALETTE],
    title: options.title ? { text: options.title, left: "center" } : undefined,
    legend: {
      data: curves.map((c) => c.label),
      bottom: 0,
    },
    grid: { left: 70, right: 24, top: options.title ? 48 : 24, bottom: 64 },
    xAxis: {
      type: options.logX ? "log" : "value",
      name: "round",
      nameLocation: "middle",
      nameGap: 28,
      min: options.logX ? undefined : 0,
    },
    yAxis: {
      type: "value",
      name: "mean cumulative regret",
      nameLocation: "middle",
      nameGap: 48,
    },
    series,
  });
  const svg = chart.renderToSVGString();
  chart.dispose();
  return canonicalizeIds(svg);
}

/** Read every input CSV of a spec, render the figure, and write it. */
export function plotRegret(spec: PlotSpec): string {
  if (!spec.output.endsWith(".svg")) {
    throw new Error(
      `output must be an .svg path (vector output only), got ${spec.output}`,
    );
  }
  const curves = spec.inputs.map((input) => ({
    label: input.label,
    summary: readSummary(input.path),
  }));
  const svg = renderRegretSvg(curves, {
    logX: spec.logX,
    title: spec.title,
    width: spec.width,
    height: spec.height,
  });
  writeFileSync(spec.output, svg, "utf8");
  return spec.output;
}
