/** Meteorological seasons: DJF winter, MAM spring, JJA summer, SON autumn. */

export const SEASONS = ["winter", "spring", "summer", "autumn"] as const;

export type Season = (typeof SEASONS)[number];

export function seasonOf(isoDate: string): Season {
  const month = Number(isoDate.slice(5, 7));
  if (month === 12 || month <= 2) return "winter";
  if (month <= 5) return "spring";
  if (month <= 8) return "summer";
  return "autumn";
}
