import { writeFileSync } from "fs";
import { groupBy, loadTable, meanByKey, numeric, SchemaError, Table } from "./csv.js";
import { documentSvg, panelSvg, Series } from "./svg.js";

export type FigureKind = "sumrate" | "beampattern" | "convergence" | "tradeoff";

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  output: string;
  methodLabels?: Record<string, string>;
}

export const DEFAULT_LABELS: Record<string, string> = {
  proposed: "Proposed",
  lfm: "LFM reference",
  zero_mui: "Zero MUI",
  pg_baseline: "PG (stand-in)",
};

const REQUIRED_COLUMNS: Record<FigureKind, string[]> = {
  sumrate: ["method", "axis_value", "sum_rate"],
  beampattern: ["theta_deg", "gain_db", "method"],
  convergence: ["iter", "sinr_sensing_db"],
  tradeoff: ["method", "axis_value", "sum_rate", "sinr_db"],
};

export interface RenderResult {
  output: string;
  warning?: string;
}

function label(method: string, labels: Record<string, string>): string {
  return labels[method] ?? method;
}

function methodSeries(
  table: Table,
  valueColumn: string,
  labels: Record<string, string>,
): Series[] {
  const series: Series[] = [];
  for (const [method, rows] of groupBy(table.rows, "method")) {
    const { x, y } = meanByKey(rows, "axis_value", valueColumn);
    series.push({ label: label(method, labels), x, y });
  }
  return series;
}

/** Render one figure; returns the output path and an optional warning. */
export function render(spec: FigureSpec): RenderResult {
  const labels = spec.methodLabels ?? DEFAULT_LABELS;
  const table = loadTable(spec.input, REQUIRED_COLUMNS[spec.kind]);
  let panels;
  switch (spec.kind) {
    case "sumrate":
      panels = [panelSvg(methodSeries(table, "sum_rate", labels), {
        title: "Achievable sum rate",
        xLabel: "Transmit SNR (dB)",
        yLabel: "Sum rate (bps/Hz)",
      })];
      break;
    case "beampattern": {
      const series: Series[] = [];
      for (const [method, rows] of groupBy(table.rows, "method")) {
        series.push({
          label: label(method, labels),
          x: numeric(rows, "theta_deg"),
          y: numeric(rows, "gain_db"),
        });
      }
      panels = [panelSvg(series, {
        title: "Beampattern",
        xLabel: "Angle (deg)",
        yLabel: "Gain (dB)",
      })];
      break;
    }
    case "convergence": {
      const rows = [...table.rows].sort(
        (a, b) => Number(a.iter) - Number(b.iter));
      const series: Series[] = rows.length === 0 ? [] : [{
        label: "Sensing SINR",
        x: rows.map((r) => Number(r.iter)),
        y: rows.map((r) => Number(r.sinr_sensing_db)),
      }];
      panels = [panelSvg(series, {
        title: "Sensing SINR convergence",
        xLabel: "Iteration",
        yLabel: "Sensing SINR (dB)",
      })];
      break;
    }
    case "tradeoff":
      panels = [
        panelSvg(methodSeries(table, "sinr_db", labels), {
          title: "(a) Sensing SINR vs trade-off factor",
          xLabel: "rho",
          yLabel: "Sensing SINR (dB)",
        }),
        panelSvg(methodSeries(table, "sum_rate", labels), {
          title: "(b) Achievable sum rate vs trade-off factor",
          xLabel: "rho",
          yLabel: "Sum rate (bps/Hz)",
        }, 360),
      ];
      break;
    default:
      throw new Error(`unknown figure kind ${spec.kind as string}`);
  }
  writeFileSync(spec.output, documentSvg(panels));
  const warning = table.rows.length === 0
    ? `${spec.input} has no data rows; wrote an empty-axes figure`
    : undefined;
  return { output: spec.output, warning };
}

export { SchemaError };
