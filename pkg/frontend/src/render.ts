import { writeFileSync } from "fs";
import * as echarts from "echarts";

import { readCsv } from "./csv";
import { FigureKind, validateTable } from "./schemas";
import { FigureOptions, buildOption } from "./figures";

export interface FigureSpec extends FigureOptions {
  kind: FigureKind;
  input: string;
  output: string;
  width?: number;
  height?: number;
}

export function renderSvg(spec: FigureSpec): string {
  const table = readCsv(spec.input);
  const rows = validateTable(spec.kind, table);
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: spec.width ?? 960,
    height: spec.height ?? 540,
  });
  chart.setOption(buildOption(spec.kind, rows, spec));
  const svg = chart.renderToSVGString();
  chart.dispose();
  return svg;
}

/** Validates, renders, and writes the figure; .svg directly, .png via sharp. */
export async function renderFigure(spec: FigureSpec): Promise<void> {
  const svg = renderSvg(spec);
  if (spec.output.endsWith(".png")) {
    const sharp = (await import("sharp")).default;
    const png = await sharp(Buffer.from(svg), { density: 144 }).png().toBuffer();
    writeFileSync(spec.output, png);
    return;
  }
  if (!spec.output.endsWith(".svg")) {
    throw new Error(`unsupported output extension on ${spec.output}; use .svg or .png`);
  }
  writeFileSync(spec.output, svg);
}
