/** Date-slider arithmetic for the chip comparator (pure, index-based). */

export function clampIndex(index: number, length: number): number {
  if (length <= 0) return -1;
  return Math.min(Math.max(index, 0), length - 1);
}

/** Step through the available dates, clamping at the ends. */
export function stepIndex(current: number, delta: number, length: number): number {
  return clampIndex(current + delta, length);
}

/** Index of the first date on or after the anchor (-1 when none). */
export function anchorIndex(dates: string[], anchor: string): number {
  return dates.findIndex((d) => d >= anchor);
}

/** Index of the date closest to the target (ties prefer the earlier date). */
export function nearestDateIndex(dates: string[], target: string): number {
  if (dates.length === 0) return -1;
  const targetMs = Date.parse(target);
  let best = 0;
  let bestGap = Infinity;
  dates.forEach((d, i) => {
    const gap = Math.abs(Date.parse(d) - targetMs);
    if (gap < bestGap) {
      best = i;
      bestGap = gap;
    }
  });
  return best;
}

/** Initial slider position: the anchor-date chip when present, else the last. */
export function initialIndex(dates: string[], anchor: string | null): number {
  if (dates.length === 0) return -1;
  if (anchor) {
    const at = anchorIndex(dates, anchor);
    if (at >= 0) return at;
  }
  return dates.length - 1;
}
