import type { EChartsOption, SeriesOption } from "echarts";

import {
  CompareRow,
  ConvergenceRow,
  FigureKind,
  LossTraceRow,
  ScoregapRow,
} from "./schemas";
import { groupBy, sortedUnique, summarize } from "./stats";

export interface FigureOptions {
  title?: string;
  logX?: boolean;
  logY?: boolean;
}

const PALETTE = ["#3562c9", "#d95151", "#3d9b62", "#9265c9", "#c98a35"];

function baseOption(title: string | undefined): EChartsOption {
  return {
    animation: false,
    backgroundColor: "#ffffff",
    color: PALETTE,
    title: title ? { text: title, left: "center", top: 4 } : undefined,
  };
}

/** Two panels: median with interquartile band of sw_p vs n, and bound curves. */
export function convergenceOption(rows: ConvergenceRow[], opts: FigureOptions = {}): EChartsOption {
  const grid = sortedUnique(rows.map((r) => r.n));
  const byN = groupBy(rows, (r) => r.n);
  const sw = grid.map((n) => summarize(byN.get(n)!.map((r) => r.sw_p)));
  const bounds = (["bound_unbounded", "bound_bounded", "bound_iid"] as const).map(
    (col) => ({
      name: col.replace("bound_", ""),
      values: grid.map((n) => summarize(byN.get(n)!.map((r) => r[col])).median),
    }),
  );

  const logAxis = { type: "log" as const };
  const series: SeriesOption[] = [
    {
      name: "interquartile band",
      type: "line",
      xAxisIndex: 0,
      yAxisIndex: 0,
      data: grid.map((n, i) => [n, sw[i].q1]),
      lineStyle: { opacity: 0 },
      stack: "band",
      symbol: "none",
      silent: true,
    },
    {
      name: "iqr-width",
      type: "line",
      xAxisIndex: 0,
      yAxisIndex: 0,
      data: grid.map((n, i) => [n, sw[i].q3 - sw[i].q1]),
      lineStyle: { opacity: 0 },
      stack: "band",
      areaStyle: { color: PALETTE[0], opacity: 0.18 },
      symbol: "none",
      silent: true,
    },
    {
      name: "median sliced distance",
      type: "line",
      xAxisIndex: 0,
      yAxisIndex: 0,
      data: grid.map((n, i) => [n, sw[i].median]),
      symbol: "circle",
    },
    ...bounds.map((b, k) => ({
      name: b.name,
      type: "line" as const,
      xAxisIndex: 1,
      yAxisIndex: 1,
      data: grid.map((n, i) => [n, b.values[i]]),
      symbol: "diamond",
      color: PALETTE[(k + 1) % PALETTE.length],
    })),
  ];

  return {
    ...baseOption(opts.title ?? "reweighed sampler: empirical error and theoretical bounds"),
    grid: [
      { left: "7%", right: "56%", top: 60, bottom: 60 },
      { left: "56%", right: "5%", top: 60, bottom: 60 },
    ],
    xAxis: [
      { ...logAxis, gridIndex: 0, name: "n samples" },
      { ...logAxis, gridIndex: 1, name: "n samples" },
    ],
    yAxis: [
      { ...logAxis, gridIndex: 0, name: "sliced distance" },
      { ...logAxis, gridIndex: 1, name: "bound value" },
    ],
    legend: { bottom: 4 },
    series,
  };
}

/** One panel per tilt strength; per-method boxes of sw_p across seeds. */
export function compareOption(rows: CompareRow[], opts: FigureOptions = {}): EChartsOption {
  const thetas = sortedUnique(rows.map((r) => r.theta));
  const methods = sortedUnique(rows.map((r) => r.method));
  const grids = thetas.map((_, i) => ({
    left: `${6 + (90 / thetas.length) * i}%`,
    width: `${90 / thetas.length - 6}%`,
    top: 70,
    bottom: 70,
  }));
  const series: SeriesOption[] = [];
  thetas.forEach((theta, gi) => {
    const data = methods.map((method) => {
      const vals = rows
        .filter((r) => r.theta === theta && r.method === method && r.sw_p !== null)
        .map((r) => r.sw_p as number);
      if (vals.length === 0) return [NaN, NaN, NaN, NaN, NaN];
      const s = summarize(vals);
      return [s.min, s.q1, s.median, s.q3, s.max];
    });
    series.push({
      name: `tilt ${theta}`,
      type: "boxplot",
      xAxisIndex: gi,
      yAxisIndex: gi,
      data,
      itemStyle: { color: "#cfdcf5", borderColor: PALETTE[0] },
    });
  });
  return {
    ...baseOption(opts.title ?? "distance to the exact tilted oracle, per method"),
    grid: grids,
    xAxis: thetas.map((theta, i) => ({
      type: "category" as const,
      gridIndex: i,
      data: methods as string[],
      name: `theta = ${theta}`,
      nameLocation: "middle" as const,
      nameGap: 42,
      axisLabel: { rotate: 20, fontSize: 10 },
    })),
    yAxis: thetas.map((_, i) => ({
      type: (opts.logY ? "log" : "value") as "log" | "value",
      gridIndex: i,
      name: i === 0 ? "sliced distance" : undefined,
    })),
    series,
  };
}

export function lossTraceOption(rows: LossTraceRow[], opts: FigureOptions = {}): EChartsOption {
  const window = Math.max(1, Math.floor(rows.length / 100));
  const smoothed: [number, number][] = [];
  for (let i = 0; i < rows.length; i += window) {
    const chunk = rows.slice(i, i + window);
    smoothed.push([
      chunk[Math.floor(chunk.length / 2)].step,
      chunk.reduce((acc, r) => acc + r.loss, 0) / chunk.length,
    ]);
  }
  return {
    ...baseOption(opts.title ?? "training loss"),
    grid: { left: 70, right: 30, top: 60, bottom: 60 },
    xAxis: { type: "value", name: "step" },
    yAxis: { type: opts.logY === false ? "value" : "log", name: "noise MSE" },
    legend: { bottom: 4 },
    series: [
      {
        name: "minibatch loss",
        type: "line",
        data: rows.map((r) => [r.step, r.loss]),
        symbol: "none",
        lineStyle: { opacity: 0.25, width: 1 },
      },
      {
        name: `window mean (${window})`,
        type: "line",
        data: smoothed,
        symbol: "none",
        lineStyle: { width: 2 },
      },
    ],
  };
}

/** Gap vs bound scatter per variant; everything under the diagonal holds. */
export function scoregapOption(rows: ScoregapRow[], opts: FigureOptions = {}): EChartsOption {
  const variants = sortedUnique(rows.map((r) => r.variant));
  const lo = Math.max(
    1e-6,
    Math.min(...rows.map((r) => Math.min(r.gap, r.bound))) * 0.5,
  );
  const hi = Math.max(...rows.map((r) => Math.max(r.gap, r.bound))) * 2;
  const series: SeriesOption[] = variants.map((variant, i) => ({
    name: variant,
    type: "scatter",
    data: rows
      .filter((r) => r.variant === variant)
      .map((r) => [Math.max(r.bound, lo), Math.max(r.gap, lo)]),
    symbolSize: 7,
    color: PALETTE[i % PALETTE.length],
  }));
  series.push({
    name: "gap = bound",
    type: "line",
    data: [
      [lo, lo],
      [hi, hi],
    ],
    symbol: "none",
    lineStyle: { type: "dashed", color: "#555" },
  });
  return {
    ...baseOption(opts.title ?? "measured field gap vs its transport bound"),
    grid: { left: 80, right: 30, top: 60, bottom: 60 },
    xAxis: { type: "log", name: "bound", min: lo, max: hi },
    yAxis: { type: "log", name: "gap", min: lo, max: hi },
    legend: { bottom: 4 },
    series,
  };
}

export function buildOption(
  kind: FigureKind,
  rows: unknown[],
  opts: FigureOptions = {},
): EChartsOption {
  switch (kind) {
    case "convergence":
      return convergenceOption(rows as ConvergenceRow[], opts);
    case "compare":
      return compareOption(rows as CompareRow[], opts);
    case "losstrace":
      return lossTraceOption(rows as LossTraceRow[], opts);
    case "scoregap":
      return scoregapOption(rows as ScoregapRow[], opts);
  }
}
