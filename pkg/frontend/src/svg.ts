/** Minimal SVG assembly: element strings, linear scales, and the shared
 *  axes frame. No DOM — figures are plain strings written to disk. */

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, children?: string | string[]): string {
  const parts = Object.entries(attrs).map(([k, v]) => `${k}="${esc(String(v))}"`);
  const open = `<${tag}${parts.length ? " " + parts.join(" ") : ""}`;
  if (children === undefined) return `${open}/>`;
  const inner = Array.isArray(children) ? children.join("") : children;
  return `${open}>${inner}</${tag}>`;
}

export function text(x: number, y: number, s: string, attrs: Attrs = {}): string {
  return el("text", { x: round2(x), y: round2(y), ...attrs }, esc(s));
}

/** Short label for an axis tick or cell annotation. */
export function fmt(v: number): string {
  if (v === 0) return "0";
  if (Math.abs(v) >= 1000 || Math.abs(v) < 0.001) return v.toExponential(1);
  return String(Number(v.toPrecision(3)));
}

export function round2(v: number): number {
  return Math.round(v * 100) / 100;
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
  ticks(count: number): number[];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const scale = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  scale.ticks = (count: number) => {
    const n = Math.max(2, count);
    return Array.from({ length: n }, (_, i) => d0 + ((d1 - d0) * i) / (n - 1));
  };
  return scale;
}

export function padDomain([lo, hi]: [number, number], frac = 0.05): [number, number] {
  const pad = (hi - lo || 1) * frac;
  return [lo - pad, hi + pad];
}

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 640,
  height: 400,
  margin: { top: 24, right: 16, bottom: 44, left: 56 },
};

export function plotArea(frame: Frame): { x0: number; x1: number; y0: number; y1: number } {
  return {
    x0: frame.margin.left,
    x1: frame.width - frame.margin.right,
    y0: frame.height - frame.margin.bottom, // y grows downward in SVG
    y1: frame.margin.top,
  };
}

/** Left + bottom axis lines, numeric y ticks, and axis titles. */
export function axes(frame: Frame, yScale: Scale, xTitle: string, yTitle: string): string[] {
  const { x0, x1, y0, y1 } = plotArea(frame);
  const out: string[] = [
    el("line", { x1: x0, y1: y0, x2: x1, y2: y0, stroke: "#333" }),
    el("line", { x1: x0, y1: y0, x2: x0, y2: y1, stroke: "#333" }),
  ];
  for (const t of yScale.ticks(5)) {
    const y = round2(yScale(t));
    out.push(el("line", { x1: x0 - 4, y1: y, x2: x0, y2: y, stroke: "#333" }));
    out.push(text(x0 - 7, y + 4, fmt(t), { "text-anchor": "end", "font-size": 11 }));
  }
  out.push(text((x0 + x1) / 2, frame.height - 8, xTitle, {
    "text-anchor": "middle", "font-size": 12,
  }));
  out.push(el("g", { transform: `translate(14 ${(y0 + y1) / 2}) rotate(-90)` },
    text(0, 0, yTitle, { "text-anchor": "middle", "font-size": 12 })));
  return out;
}

export function svgDoc(frame: Frame, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}" font-family="sans-serif">`,
    el("rect", { x: 0, y: 0, width: frame.width, height: frame.height, fill: "white" }),
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
