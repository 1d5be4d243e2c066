/** Minimal line-chart SVG builder: axes, ticks, polylines, legend. */

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export interface PanelOptions {
  title?: string;
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
}

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { top: 34, right: 16, bottom: 44, left: 58 };

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (lo > hi) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

function ticks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const pick = candidates.find((s) => span / s <= count) ?? 10 * step;
  const start = Math.ceil(lo / pick) * pick;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += pick) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

function fmt(v: number): string {
  return Math.abs(v) >= 1e4 || (v !== 0 && Math.abs(v) < 1e-2)
    ? v.toExponential(1)
    : String(Number(v.toPrecision(6)));
}

export function panelSvg(series: Series[], options: PanelOptions,
                         yOffset = 0): { body: string; width: number; height: number } {
  const width = options.width ?? 560;
  const height = options.height ?? 360;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const allX = series.flatMap((s) => s.x);
  const allY = series.flatMap((s) => s.y);
  const [x0, x1] = extent(allX);
  const [y0, y1] = extent(allY);
  const sx = (v: number) => MARGIN.left + ((v - x0) / (x1 - x0)) * plotW;
  const sy = (v: number) =>
    yOffset + MARGIN.top + plotH - ((v - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  const top = yOffset + MARGIN.top;
  parts.push(
    `<rect x="${MARGIN.left}" y="${top}" width="${plotW}" height="${plotH}" ` +
    `fill="none" stroke="#333" stroke-width="1"/>`);
  if (options.title) {
    parts.push(
      `<text x="${width / 2}" y="${top - 12}" text-anchor="middle" ` +
      `font-size="14" font-weight="bold">${options.title}</text>`);
  }
  for (const t of ticks(x0, x1)) {
    const px = sx(t);
    parts.push(
      `<line x1="${px}" y1="${top + plotH}" x2="${px}" y2="${top + plotH + 5}" stroke="#333"/>`,
      `<text x="${px}" y="${top + plotH + 18}" text-anchor="middle" font-size="11">${fmt(t)}</text>`);
  }
  for (const t of ticks(y0, y1)) {
    const py = sy(t);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${py}" x2="${MARGIN.left}" y2="${py}" stroke="#333"/>`,
      `<text x="${MARGIN.left - 8}" y="${py + 4}" text-anchor="end" font-size="11">${fmt(t)}</text>`,
      `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + plotW}" y2="${py}" ` +
      `stroke="#ddd" stroke-width="0.5"/>`);
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${top + plotH + 36}" ` +
    `text-anchor="middle" font-size="12">${options.xLabel}</text>`,
    `<text x="16" y="${top + plotH / 2}" text-anchor="middle" font-size="12" ` +
    `transform="rotate(-90 16 ${top + plotH / 2})">${options.yLabel}</text>`);

  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    const points = s.x
      .map((vx, j) => [vx, s.y[j]] as const)
      .filter(([vx, vy]) => Number.isFinite(vx) && Number.isFinite(vy))
      .map(([vx, vy]) => `${sx(vx).toFixed(2)},${sy(vy).toFixed(2)}`)
      .join(" ");
    if (points.length > 0) {
      parts.push(
        `<polyline points="${points}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    }
    const ly = top + 16 + 16 * i;
    const lx = MARGIN.left + plotW - 150;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" ` +
      `stroke="${color}" stroke-width="1.8"/>`,
      `<text x="${lx + 28}" y="${ly}" font-size="11">${s.label}</text>`);
  });
  if (series.length === 0 || allY.length === 0) {
    parts.push(
      `<text x="${MARGIN.left + plotW / 2}" y="${top + plotH / 2}" ` +
      `text-anchor="middle" font-size="12" fill="#888">no data</text>`);
  }
  return { body: parts.join("\n"), width, height };
}

export function documentSvg(panels: { body: string; width: number; height: number }[]): string {
  const width = Math.max(...panels.map((p) => p.width));
  const height = panels.reduce((acc, p) => acc + p.height, 0);
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    ...panels.map((p) => p.body),
    `</svg>`,
  ].join("\n");
}
