/** SVG time-series chart with fixed y-ranges per index family.
 *
 * Ranges are fixed (not data-driven) so the visual magnitude of a change is
 * comparable across parcels: normalized-difference indices live in [-1, 1],
 * EVI in [-1, 3], and the EOM/vegetation ratios in [-3, 3]. Missing values
 * split the polyline into segments instead of interpolating across gaps.
 */

export const EOM_INDEX_NAMES = ["eomi1", "eomi2", "eomi3", "eomi4", "nbr2"] as const;
export const VEG_INDEX_NAMES = ["ndvi", "evi"] as const;
export const INDEX_NAMES = [...EOM_INDEX_NAMES, ...VEG_INDEX_NAMES];
export const RATIO_NAMES = EOM_INDEX_NAMES.flatMap((e) =>
  VEG_INDEX_NAMES.map((v) => `r_${e}_${v}`),
);

export type Family = "normalized" | "evi" | "ratio";

export function familyOf(name: string): Family {
  if (name.startsWith("r_")) return "ratio";
  if (name === "evi") return "evi";
  return "normalized";
}

export function yRange(family: Family): [number, number] {
  switch (family) {
    case "normalized":
      return [-1, 1];
    case "evi":
      return [-1, 3];
    case "ratio":
      return [-3, 3];
  }
}

export interface ChartGeometry {
  width: number;
  height: number;
  padLeft: number;
  padRight: number;
  padTop: number;
  padBottom: number;
}

export const DEFAULT_GEOMETRY: ChartGeometry = {
  width: 640,
  height: 220,
  padLeft: 42,
  padRight: 10,
  padTop: 10,
  padBottom: 24,
};

export function xPosition(index: number, count: number, geom: ChartGeometry): number {
  const span = geom.width - geom.padLeft - geom.padRight;
  if (count <= 1) return geom.padLeft + span / 2;
  return geom.padLeft + (span * index) / (count - 1);
}

export function yPosition(value: number, range: [number, number], geom: ChartGeometry): number {
  const [lo, hi] = range;
  const clamped = Math.min(Math.max(value, lo), hi);
  const span = geom.height - geom.padTop - geom.padBottom;
  return geom.padTop + span * (1 - (clamped - lo) / (hi - lo));
}

/** Split a sparse series into runs of consecutive defined points. */
export function segments(values: (number | null)[]): { start: number; values: number[] }[] {
  const runs: { start: number; values: number[] }[] = [];
  let current: { start: number; values: number[] } | null = null;
  values.forEach((v, i) => {
    if (v === null || Number.isNaN(v)) {
      current = null;
      return;
    }
    if (current === null) {
      current = { start: i, values: [] };
      runs.push(current);
    }
    current.values.push(v);
  });
  return runs;
}

export interface ChartSeries {
  name: string;
  values: (number | null)[];
  color: string;
}

export function buildChartSvg(
  dates: string[],
  series: ChartSeries[],
  anchor: string | null,
  geom: ChartGeometry = DEFAULT_GEOMETRY,
): string {
  const family = series.length ? familyOf(series[0]!.name) : "normalized";
  const range = yRange(family);
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${geom.width} ${geom.height}" ` +
      `width="${geom.width}" height="${geom.height}" role="img">`,
  ];

  const gridValues =
    family === "normalized" ? [-1, -0.5, 0, 0.5, 1] : family === "evi" ? [-1, 0, 1, 2, 3] : [-3, -1.5, 0, 1.5, 3];
  for (const v of gridValues) {
    const y = yPosition(v, range, geom);
    parts.push(
      `<line x1="${geom.padLeft}" y1="${y.toFixed(1)}" x2="${geom.width - geom.padRight}" ` +
        `y2="${y.toFixed(1)}" class="grid"/>`,
      `<text x="${geom.padLeft - 6}" y="${(y + 3).toFixed(1)}" class="axis" text-anchor="end">${v}</text>`,
    );
  }

  if (anchor) {
    const at = dates.findIndex((d) => d >= anchor);
    if (at >= 0) {
      const x = xPosition(at, dates.length, geom);
      parts.push(
        `<line x1="${x.toFixed(1)}" y1="${geom.padTop}" x2="${x.toFixed(1)}" ` +
          `y2="${geom.height - geom.padBottom}" class="anchor"/>`,
      );
    }
  }

  for (const s of series) {
    for (const run of segments(s.values)) {
      const points = run.values
        .map((v, j) => {
          const x = xPosition(run.start + j, dates.length, geom);
          const y = yPosition(v, range, geom);
          return `${x.toFixed(1)},${y.toFixed(1)}`;
        })
        .join(" ");
      if (run.values.length === 1) {
        const [x, y] = points.split(",");
        parts.push(`<circle cx="${x}" cy="${y}" r="2.5" fill="${s.color}"/>`);
      } else {
        parts.push(`<polyline points="${points}" fill="none" stroke="${s.color}" stroke-width="1.5"/>`);
      }
    }
  }

  if (dates.length) {
    const first = dates[0]!;
    const last = dates[dates.length - 1]!;
    parts.push(
      `<text x="${geom.padLeft}" y="${geom.height - 6}" class="axis">${first}</text>`,
      `<text x="${geom.width - geom.padRight}" y="${geom.height - 6}" class="axis" ` +
        `text-anchor="end">${last}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
