/** Stats-panel view helpers. */

import type { GroupShare, StatsResponse } from "./types.js";

export function recallLine(stats: StatsResponse): string {
  if (stats.recall === null || stats.recall_percent === null) {
    return "No annotations yet";
  }
  const coverage = Math.round(stats.coverage * 1000) / 10;
  const base = `Recall ${stats.recall_percent.toFixed(2)}% (${stats.visible}/${stats.annotated})`;
  return stats.partial_coverage
    ? `${base} — partial coverage ${coverage}% of ${stats.treated} treated`
    : `${base} over all ${stats.treated} treated parcels`;
}

export interface BarRow {
  label: string;
  visiblePct: number;
  notVisiblePct: number;
  count: number;
}

export function barRows(table: Record<string, GroupShare>): BarRow[] {
  return Object.entries(table).map(([label, share]) => ({
    label,
    visiblePct: share.visible_pct,
    notVisiblePct: share.not_visible_pct,
    count: share.count,
  }));
}
